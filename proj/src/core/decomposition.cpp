#include "decomposition.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace dplr {

double frobenius_residual(const Eigen::MatrixXd& w, const Eigen::MatrixXd& b,
                          const Eigen::MatrixXd& l) {
  return (w - b * l).norm();
}

double max_column_l1(const Eigen::MatrixXd& l) {
  if (l.size() == 0) return 0.0;
  return l.cwiseAbs().colwise().sum().maxCoeff();
}

Eigen::MatrixXd update_b(const Eigen::MatrixXd& w, const Eigen::MatrixXd& l,
                         const Eigen::MatrixXd& pi, double beta) {
  Eigen::MatrixXd lhs = beta * (l * l.transpose());
  lhs.diagonal().array() += 1.0;  // beta*L*L^T + I, symmetric positive definite
  const Eigen::MatrixXd rhs = (beta * w + pi) * l.transpose();  // m x r
  return lhs.ldlt().solve(rhs.transpose()).transpose();
}

Eigen::MatrixXd grad_g(const Eigen::MatrixXd& l, const Eigen::MatrixXd& b,
                       const Eigen::MatrixXd& w, const Eigen::MatrixXd& pi,
                       double beta) {
  return beta * (b.transpose() * (b * l)) - b.transpose() * (beta * w + pi);
}

Eigen::MatrixXd project_columns_l1(const Eigen::MatrixXd& l) {
  const Eigen::Index r = l.rows();
  const Eigen::Index n = l.cols();
  Eigen::MatrixXd out = l;
  std::vector<double> mags(static_cast<size_t>(r));
  for (Eigen::Index j = 0; j < n; ++j) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) {
      mags[static_cast<size_t>(i)] = std::fabs(l(i, j));
      total += mags[static_cast<size_t>(i)];
    }
    if (total <= 1.0) continue;  // already feasible, returned bit-for-bit

    std::sort(mags.begin(), mags.end(), std::greater<double>());
    double prefix = 0.0;
    double theta = 0.0;
    for (Eigen::Index k = 0; k < r; ++k) {
      prefix += mags[static_cast<size_t>(k)];
      const double candidate = (prefix - 1.0) / static_cast<double>(k + 1);
      if (mags[static_cast<size_t>(k)] > candidate) {
        theta = candidate;
      } else {
        break;
      }
    }

    double shrunk_total = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) {
      const double mag = std::fabs(l(i, j)) - theta;
      const double value = mag > 0.0 ? std::copysign(mag, l(i, j)) : 0.0;
      out(i, j) = value;
      shrunk_total += std::fabs(value);
    }
    // Rounding can leave the thresholded column a few ulps above the ball;
    // nudging strictly inside keeps a second projection an exact no-op.
    if (shrunk_total > 1.0) {
      const double fix = (1.0 - 1e-15) / shrunk_total;
      for (Eigen::Index i = 0; i < r; ++i) out(i, j) *= fix;
    }
  }
  return out;
}

Eigen::MatrixXd solve_l(const Eigen::MatrixXd& b, const Eigen::MatrixXd& w,
                        const Eigen::MatrixXd& pi, double beta,
                        const Eigen::MatrixXd& l0, NesterovState& state,
                        Eigen::Index max_steps) {
  const Eigen::Index r = l0.rows();
  const Eigen::Index n = l0.cols();
  const double chi = static_cast<double>(r) * static_cast<double>(n) * 1e-12;
  state.chi = chi;

  const Eigen::MatrixXd btb = b.transpose() * b;                   // r x r
  const Eigen::MatrixXd bt_rhs = b.transpose() * (beta * w + pi);  // r x n

  const auto g_value = [&](const Eigen::MatrixXd& lm) {
    return 0.5 * beta * (btb * lm).cwiseProduct(lm).sum() -
           bt_rhs.cwiseProduct(lm).sum();
  };

  Eigen::MatrixXd l_cur = l0;
  Eigen::MatrixXd l_prev = l0;
  double omega = state.omega;
  double delta_prev = 1.0;
  double delta = 1.0;

  for (Eigen::Index t = 1; t <= max_steps; ++t) {
    state.t = t;
    // Momentum extrapolation; zero on the first step (cold start).
    const double alpha = t == 1 ? 0.0 : (delta_prev - 1.0) / delta;
    const Eigen::MatrixXd s = l_cur + alpha * (l_cur - l_prev);
    const double g_s = g_value(s);
    const Eigen::MatrixXd grad_s = beta * (btb * s) - bt_rhs;

    bool accepted = false;
    Eigen::MatrixXd l_new;
    double omega_accepted = omega;
    for (int j = 0; j < 60; ++j) {
      const double trial = std::ldexp(omega, j);  // 2^j * omega
      const Eigen::MatrixXd projected = project_columns_l1(s - grad_s / trial);
      if ((s - projected).norm() < chi) {
        state.omega = trial;
        return projected;
      }
      const Eigen::MatrixXd diff = projected - s;
      const double model = g_s + grad_s.cwiseProduct(diff).sum() +
                           0.5 * trial * diff.squaredNorm();
      if (g_value(projected) <= model + 1e-12 * std::fabs(model)) {
        l_new = std::move(projected);
        omega_accepted = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      state.omega = omega;
      return l_cur;
    }
    omega = omega_accepted;
    l_prev = std::move(l_cur);
    l_cur = std::move(l_new);
    delta_prev = delta;
    delta = (1.0 + std::sqrt(1.0 + 4.0 * delta * delta)) / 2.0;
  }
  state.omega = omega;
  return l_cur;
}

namespace {

struct InitFactors {
  Eigen::MatrixXd b;
  Eigen::MatrixXd l;
  Eigen::Index rho = 0;
};

// Shared construction for svd_init and the under-ranked starting point:
// scales the top min(rank, r) singular triplets so every L column is
// feasible (column L2 of V is at most 1, so L1/sqrt(rho) is at most 1).
InitFactors init_factors(const SvdResult& dec, Eigen::Index m, Eigen::Index n,
                         Eigen::Index r) {
  InitFactors out;
  out.rho = std::min<Eigen::Index>(dec.summary.rank, r);
  out.b = Eigen::MatrixXd::Zero(m, r);
  out.l = Eigen::MatrixXd::Zero(r, n);
  if (out.rho == 0) return out;
  const double root = std::sqrt(static_cast<double>(out.rho));
  for (Eigen::Index k = 0; k < out.rho; ++k) {
    out.b.col(k) = root * dec.sigma(k) * dec.u.col(k);
    out.l.row(k) = dec.v.row(k) / root;
  }
  return out;
}

Decomposition finish(Eigen::MatrixXd b, Eigen::MatrixXd l,
                     const Eigen::MatrixXd& w, double gamma,
                     Eigen::Index iterations, bool converged) {
  Decomposition d;
  d.r = l.rows();
  d.residual = frobenius_residual(w, b, l);
  d.objective = b.squaredNorm();
  d.scale = d.objective;
  d.l_sensitivity = max_column_l1(l);
  d.gamma = gamma;
  d.iterations = iterations;
  d.converged = converged;
  d.b = std::move(b);
  d.l = std::move(l);
  return d;
}

}  // namespace

Decomposition svd_init(const WorkloadMatrix& w, Eigen::Index r) {
  if (r < 1) throw InvalidArgument("inner dimension r must be at least 1");
  const SvdResult dec = svd(w);
  if (r < dec.summary.rank) {
    throw InvalidArgument(
        "inner dimension r is below the workload rank; the exact construction "
        "needs r >= rank");
  }
  InitFactors init = init_factors(dec, w.m(), w.n(), r);
  return finish(std::move(init.b), std::move(init.l), w.entries, 0.0, 0, true);
}

Decomposition scale_decomposition(const Decomposition& d, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("scale factor must be positive");
  Decomposition out = d;
  out.b = alpha * d.b;
  out.l = d.l / alpha;
  out.objective = out.b.squaredNorm();
  out.scale = out.objective;
  out.l_sensitivity = max_column_l1(out.l);
  return out;
}

Decomposition decompose(const WorkloadMatrix& w, const SolverConfig& cfg,
                        std::vector<AlmTracePoint>* trace) {
  if (cfg.gamma < 0.0) throw InvalidArgument("gamma must be non-negative");
  if (!(cfg.beta0 > 0.0)) throw InvalidArgument("beta0 must be positive");
  if (cfg.r < 0) throw InvalidArgument("inner dimension r must be at least 1");
  if (!w.entries.allFinite()) {
    throw InvalidArgument("workload matrix has non-finite entries");
  }

  const Eigen::Index m = w.m();
  const Eigen::Index n = w.n();
  const double w_norm = w.entries.norm();
  const SvdResult dec = svd(w);
  const Eigen::Index rank = dec.summary.rank;

  const Eigen::Index r =
      cfg.r > 0 ? cfg.r
                : std::max<Eigen::Index>(
                      1, static_cast<Eigen::Index>(
                             std::llround(1.2 * static_cast<double>(rank))));

  // gamma = 0 requests exact factorization, unattainable in floating point;
  // substitute a tolerance at the round-off scale of W.
  const double gamma_eff = cfg.gamma > 0.0 ? cfg.gamma : 1e-8 * w_norm;
  const double residual_tol =
      cfg.residual_tol >= 0.0 ? cfg.residual_tol : gamma_eff;
  const double feasible_l1 = 1.0 + 1e-6;

  InitFactors init = init_factors(dec, m, n, r);
  Eigen::MatrixXd b = std::move(init.b);
  Eigen::MatrixXd l = std::move(init.l);

  if (rank == 0) {
    return finish(std::move(b), std::move(l), w.entries, gamma_eff, 0, true);
  }

  struct Best {
    double objective = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd b, l;
    double tau = 0.0;
    bool set = false;
  } best;

  const double init_tau = frobenius_residual(w.entries, b, l);
  if (init_tau <= residual_tol) {
    best = {b.squaredNorm(), b, l, init_tau, true};
  }

  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(m, n);
  double beta = cfg.beta0;
  NesterovState nes;
  Eigen::Index k = 0;
  const auto start = std::chrono::steady_clock::now();
  const auto over_deadline = [&] {
    if (cfg.deadline_seconds < 0.0) return false;
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    return elapsed.count() > cfg.deadline_seconds;
  };

  Eigen::MatrixXd residual_mat;
  double min_tau = init_tau;
  Eigen::MatrixXd min_tau_b = b;
  Eigen::MatrixXd min_tau_l = l;

  for (k = 1; k <= cfg.outer_max; ++k) {
    if (over_deadline()) {
      --k;
      break;
    }
    // Alternate the closed-form B update with the accelerated projected
    // gradient L solve until the subproblem objective stalls.
    double prev_j = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index it = 0; it < cfg.inner_max; ++it) {
      b = update_b(w.entries, l, pi, beta);
      nes.omega = std::max(1.0, nes.omega / 2.0);
      l = solve_l(b, w.entries, pi, beta, l, nes, cfg.nesterov_max);
      residual_mat = w.entries - b * l;
      const double j_val = 0.5 * b.squaredNorm() +
                           pi.cwiseProduct(residual_mat).sum() +
                           0.5 * beta * residual_mat.squaredNorm();
      if (!std::isnan(prev_j) &&
          std::fabs(prev_j - j_val) <= cfg.inner_rel_tol * (1.0 + std::fabs(j_val))) {
        break;
      }
      prev_j = j_val;
    }

    residual_mat = w.entries - b * l;
    const double tau = residual_mat.norm();
    const double objective = b.squaredNorm();
    const double l_sens = max_column_l1(l);
    if (trace) trace->push_back({k, beta, objective, tau});

    if (tau < min_tau) {
      min_tau = tau;
      min_tau_b = b;
      min_tau_l = l;
    }
    if (tau <= residual_tol && l_sens <= feasible_l1 &&
        (!best.set || objective < best.objective)) {
      best = {objective, b, l, tau, true};
    }
    if (tau <= residual_tol) break;
    if (beta >= cfg.beta_max) break;

    // A factor pair whose B column and L row both vanish receives zero
    // gradient and a zero closed-form update, so it can never revive on its
    // own and the iterate is trapped below the needed rank. Reseed such
    // pairs from the residual's leading singular directions.
    std::vector<Eigen::Index> dead;
    for (Eigen::Index j = 0; j < r; ++j) {
      if (b.col(j).norm() * l.row(j).norm() <= 1e-10 * w_norm) {
        dead.push_back(j);
      }
    }
    if (!dead.empty()) {
      Eigen::BDCSVD<Eigen::MatrixXd> rsvd(
          residual_mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& sig = rsvd.singularValues();
      Eigen::Index q = 0;
      bool reseeded = false;
      for (Eigen::Index j : dead) {
        if (q >= sig.size() || sig(q) <= 1e-12 * tau) break;
        const Eigen::VectorXd v = rsvd.matrixV().col(q);
        const double l1 = v.lpNorm<1>();
        l.row(j) = v.transpose() / l1;
        b.col(j) = sig(q) * l1 * rsvd.matrixU().col(q);
        ++q;
        reseeded = true;
      }
      if (reseeded) nes.omega = 1.0;
    }

    if (k % cfg.beta_double_every == 0) beta *= 2.0;
    pi += beta * residual_mat;
  }
  const Eigen::Index iterations = std::min(k, cfg.outer_max);

  if (best.set) {
    Decomposition d = finish(std::move(best.b), std::move(best.l), w.entries,
                             gamma_eff, iterations, true);
    return d;
  }
  return finish(std::move(min_tau_b), std::move(min_tau_l), w.entries,
                gamma_eff, iterations, false);
}

}  // namespace dplr
