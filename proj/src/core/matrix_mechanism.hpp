#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "mechanisms.hpp"
#include "workload.hpp"

namespace dplr {

// Tuning for the strategy-matrix search. `smoothing_tolerance` is the
// additive accuracy target of the softened maximum (distinct from the
// privacy budget); mu = smoothing_tolerance / log(n). Non-positive
// smoothing_tolerance selects the default 1e-3 * max(diag(W^T W)).
struct MmConfig {
  double smoothing_tolerance = -1.0;
  Eigen::Index max_iters = 300;
  Eigen::Index window = 10;          // non-monotone acceptance lookback
  double eig_floor_factor = 1e-8;    // floor = factor * tr(M0)/n, fixed
  double armijo = 1e-4;
  double bb_min = 1e-10;
  double bb_max = 1e10;
  double grad_tol = 1e-9;          // relative projected-gradient stop
  double deadline_seconds = -1.0;  // < 0: no limit; else stop cooperatively
};

// A full-column-rank set of r alternative queries answered noisily and
// recombined to answer the workload.
struct StrategyMatrix {
  Eigen::MatrixXd a;  // r x n
  double sensitivity_a = 0.0;
  Eigen::Index iterations = 0;
  double objective = 0.0;
  bool converged = false;
  std::vector<double> objective_history;
};

// Softened maximum max(v) + mu * log(sum exp((v_i - max)/mu)); lies within
// [max(v), max(v) + mu*log(n)].
double smoothed_max(const Eigen::VectorXd& v, double mu);

// Gradient of smoothed_max: softmax weights computed through the
// overflow-stable form (sum_j exp((v_j - v_i)/mu))^-1; sums to 1.
Eigen::VectorXd smoothed_max_grad(const Eigen::VectorXd& v, double mu);

// Value and gradient of F(M) = smoothed_max(diag M) * trace(W^T W M^-1)
// over symmetric positive definite M. The gradient combines the softmax
// weights (on the diagonal) with -M^-1 W^T W M^-1 by the product rule.
// Throws a domain error when M has an eigenvalue at or below eig_floor.
std::pair<double, Eigen::MatrixXd> mm_objective_grad(const Eigen::MatrixXd& m,
                                                     const Eigen::MatrixXd& w,
                                                     double mu,
                                                     double eig_floor);

// Minimizes F over the positive definite cone by spectral projected
// gradient with a non-monotone (window-max) acceptance rule; the cone
// projection clips eigenvalues at the floor. Recovers the strategy as the
// symmetric square root A = sum sqrt(lambda_i) v_i v_i^T of the final M,
// so A^T A = M.
StrategyMatrix mm_solve_strategy(const WorkloadMatrix& w,
                                 const MmConfig& cfg = {});

// Answers W through the strategy: W * A^+ * (A * D + eta), eta i.i.d.
// Laplace(sensitivity_a * unit / epsilon).
NoisyAnswer mm_answer(const StrategyMatrix& strategy, const WorkloadMatrix& w,
                      const Eigen::VectorXd& counts, const PrivacyParams& p,
                      Rng& rng, uint64_t seed = 0);

// Analytic expected total squared error of mm_answer:
// 2 * (sensitivity_a * unit / eps)^2 * ||W A^+||_F^2.
double expected_error_mm(const StrategyMatrix& strategy,
                         const WorkloadMatrix& w, const PrivacyParams& p);

}  // namespace dplr
