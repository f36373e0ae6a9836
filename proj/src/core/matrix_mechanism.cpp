#include "matrix_mechanism.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

#include "errors.hpp"

namespace dplr {

double smoothed_max(const Eigen::VectorXd& v, double mu) {
  if (v.size() == 0) throw InvalidArgument("smoothed max of an empty vector");
  if (!(mu > 0.0)) throw InvalidArgument("smoothing mu must be positive");
  const double top = v.maxCoeff();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    sum += std::exp((v(i) - top) / mu);
  }
  return top + mu * std::log(sum);
}

Eigen::VectorXd smoothed_max_grad(const Eigen::VectorXd& v, double mu) {
  if (v.size() == 0) throw InvalidArgument("smoothed max of an empty vector");
  if (!(mu > 0.0)) throw InvalidArgument("smoothing mu must be positive");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double denom = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      denom += std::exp((v(j) - v(i)) / mu);
    }
    out(i) = 1.0 / denom;
  }
  return out;
}

std::pair<double, Eigen::MatrixXd> mm_objective_grad(const Eigen::MatrixXd& m,
                                                     const Eigen::MatrixXd& w,
                                                     double mu,
                                                     double eig_floor) {
  if (m.rows() != m.cols()) throw InvalidArgument("M must be square");
  if (m.cols() != w.cols()) {
    throw InvalidArgument("M dimension does not match workload domain");
  }
  if (!m.isApprox(m.transpose(), 1e-10)) {
    throw InvalidArgument("M must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) {
    throw DomainError("eigendecomposition of M failed");
  }
  if (eig.eigenvalues().minCoeff() <= eig_floor) {
    throw DomainError("M is not positive definite above the eigenvalue floor");
  }

  const Eigen::MatrixXd m_inv =
      eig.eigenvectors() *
      eig.eigenvalues().cwiseInverse().asDiagonal() *
      eig.eigenvectors().transpose();
  const Eigen::MatrixXd gram = w.transpose() * w;
  const double trace_term = (gram * m_inv).trace();
  const Eigen::VectorXd diag = m.diagonal();
  const double max_term = smoothed_max(diag, mu);

  const Eigen::MatrixXd trace_grad = -(m_inv * gram * m_inv);
  Eigen::MatrixXd grad = max_term * trace_grad;
  grad.diagonal() += trace_term * smoothed_max_grad(diag, mu);
  return {max_term * trace_term, grad};
}

namespace {

Eigen::MatrixXd project_pd(const Eigen::MatrixXd& m, double eig_floor) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    lambda(i) = std::max(lambda(i), eig_floor);
  }
  return eig.eigenvectors() * lambda.asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace

StrategyMatrix mm_solve_strategy(const WorkloadMatrix& w, const MmConfig& cfg) {
  const Eigen::Index n = w.n();
  if (n < 1) throw InvalidArgument("workload domain must be non-empty");
  if (cfg.window < 1) throw InvalidArgument("non-monotone window must be >= 1");

  const Eigen::MatrixXd gram = w.entries.transpose() * w.entries;
  const Eigen::VectorXd gram_diag = gram.diagonal();
  const double eig_floor =
      cfg.eig_floor_factor * gram_diag.sum() / static_cast<double>(n);
  const double tolerance = cfg.smoothing_tolerance > 0.0
                               ? cfg.smoothing_tolerance
                               : 1e-3 * gram_diag.maxCoeff();
  // log(1) = 0 would destroy mu for a one-cell domain; floor the divisor.
  const double mu =
      tolerance / std::max(std::log(static_cast<double>(n)), 1e-2);

  Eigen::MatrixXd m = gram_diag.asDiagonal();
  m.diagonal().array() += eig_floor;
  m = project_pd(m, eig_floor);

  auto eval = [&](const Eigen::MatrixXd& point) {
    return mm_objective_grad(point, w.entries, mu, eig_floor * 0.5);
  };

  auto [f_cur, g_cur] = eval(m);
  std::deque<double> recent{f_cur};
  std::vector<double> history{f_cur};

  double step = 1.0 / std::max(1.0, g_cur.norm());
  const double scale0 = m.norm();
  bool converged = false;
  Eigen::Index iter = 0;
  const auto start = std::chrono::steady_clock::now();

  for (iter = 1; iter <= cfg.max_iters; ++iter) {
    if (cfg.deadline_seconds >= 0.0) {
      const std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - start;
      if (elapsed.count() > cfg.deadline_seconds) {
        --iter;
        break;
      }
    }
    const double f_ref = *std::max_element(recent.begin(), recent.end());
    Eigen::MatrixXd m_new;
    double f_new = 0.0;
    Eigen::MatrixXd g_new;
    bool accepted = false;
    double trial = step;
    for (int back = 0; back < 60; ++back) {
      m_new = project_pd(m - trial * g_cur, eig_floor);
      const Eigen::MatrixXd direction = m_new - m;
      std::tie(f_new, g_new) = eval(m_new);
      const double decrease = g_cur.cwiseProduct(direction).sum();
      if (f_new <= f_ref + cfg.armijo * decrease) {
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) break;

    // Barzilai-Borwein spectral step from the accepted move.
    const Eigen::MatrixXd s = m_new - m;
    const Eigen::MatrixXd y = g_new - g_cur;
    const double sy = s.cwiseProduct(y).sum();
    if (sy > 0.0) {
      step = std::clamp(s.squaredNorm() / sy, cfg.bb_min, cfg.bb_max);
    } else {
      step = cfg.bb_max;
    }

    m = std::move(m_new);
    f_cur = f_new;
    g_cur = std::move(g_new);
    history.push_back(f_cur);
    recent.push_back(f_cur);
    if (static_cast<Eigen::Index>(recent.size()) > cfg.window) {
      recent.pop_front();
    }

    const double stationarity = (project_pd(m - g_cur, eig_floor) - m).norm();
    if (stationarity <= cfg.grad_tol * std::max(1.0, scale0)) {
      converged = true;
      break;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  Eigen::VectorXd roots = eig.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    roots(i) = std::sqrt(std::max(roots(i), 0.0));
  }
  StrategyMatrix out;
  out.a = eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
  out.sensitivity_a = sensitivity(out.a);
  out.iterations = std::min(iter, cfg.max_iters);
  out.objective = f_cur;
  out.converged = converged;
  out.objective_history = std::move(history);
  return out;
}

NoisyAnswer mm_answer(const StrategyMatrix& strategy, const WorkloadMatrix& w,
                      const Eigen::VectorXd& counts, const PrivacyParams& p,
                      Rng& rng, uint64_t seed) {
  validate(p);
  if (strategy.a.cols() != w.n()) {
    throw InvalidArgument("strategy does not match workload domain");
  }
  if (counts.size() != w.n()) {
    throw InvalidArgument("count vector length does not match workload domain");
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(strategy.a);
  if (cod.rank() < strategy.a.cols()) {
    throw InvalidArgument(
        "strategy matrix is column-rank-deficient; it cannot answer the "
        "workload");
  }
  const double scale = strategy.sensitivity_a * p.unit_sensitivity / p.epsilon;
  Eigen::VectorXd noisy = strategy.a * counts;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) {
    noisy(i) += laplace_or_zero(scale, rng);
  }
  return NoisyAnswer{w.entries * cod.solve(noisy), "MM", seed};
}

double expected_error_mm(const StrategyMatrix& strategy,
                         const WorkloadMatrix& w, const PrivacyParams& p) {
  validate(p);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(strategy.a);
  if (cod.rank() < strategy.a.cols()) {
    throw InvalidArgument("strategy matrix is column-rank-deficient");
  }
  const Eigen::MatrixXd pinv = cod.pseudoInverse();
  const double scale = strategy.sensitivity_a * p.unit_sensitivity / p.epsilon;
  return 2.0 * scale * scale * (w.entries * pinv).squaredNorm();
}

}  // namespace dplr
