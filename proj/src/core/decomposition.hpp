#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "workload.hpp"

namespace dplr {

// Factorization W ~= B * L used to answer the batch through r noisy
// intermediate queries: noise enters L*D scaled by l_sensitivity and is
// recombined through B, so `objective` (= scale) and `l_sensitivity`
// together determine the mechanism's expected error.
struct Decomposition {
  Eigen::MatrixXd b;  // m x r
  Eigen::MatrixXd l;  // r x n
  Eigen::Index r = 0;
  double gamma = 0.0;          // allowed residual ||W - BL||_F
  double residual = 0.0;       // achieved ||W - BL||_F
  double objective = 0.0;      // trace(B^T B)
  double scale = 0.0;          // sum of squared entries of B (== objective)
  double l_sensitivity = 0.0;  // max column absolute sum of L
  Eigen::Index iterations = 0;
  bool converged = false;
};

// r == 0 selects the default round(1.2 * rank(W)).
// gamma == 0 requests the exact-factorization program, implemented with an
// effective tolerance of 1e-8 * ||W||_F.
// residual_tol < 0 selects the effective gamma.
struct SolverConfig {
  Eigen::Index r = 0;
  double gamma = 0.01;
  double beta0 = 1.0;
  double beta_max = 1048576.0;  // 2^20
  Eigen::Index beta_double_every = 10;
  Eigen::Index outer_max = 400;
  Eigen::Index inner_max = 100;
  double inner_rel_tol = 1e-6;
  Eigen::Index nesterov_max = 200;
  double residual_tol = -1.0;
  double deadline_seconds = -1.0;  // < 0: no limit; else stop cooperatively
  uint64_t seed = 0;
};

// Accelerated-projected-gradient bookkeeping carried across inner solves so
// the Lipschitz estimate warm-starts.
struct NesterovState {
  double omega = 1.0;
  double delta_prev = 1.0;
  double delta = 1.0;
  double chi = 0.0;
  Eigen::Index t = 0;
};

// One outer-iteration sample of the solver trajectory.
struct AlmTracePoint {
  Eigen::Index k = 0;
  double beta = 0.0;
  double objective = 0.0;
  double tau = 0.0;  // ||W - BL||_F after the iteration's alternations
};

// Minimizes trace(B^T B) subject to ||W - BL||_F <= gamma and every column
// of L having absolute sum at most 1, by an augmented-Lagrangian outer loop
// (multiplier pi, penalty beta doubled every beta_double_every iterations)
// whose subproblems alternate the closed-form B update with the accelerated
// projected-gradient L solve. Returns the best feasible iterate, or the
// minimum-residual iterate flagged converged=false when none is feasible.
Decomposition decompose(const WorkloadMatrix& w, const SolverConfig& cfg,
                        std::vector<AlmTracePoint>* trace = nullptr);

// Closed-form minimizer of the augmented Lagrangian in B for fixed L:
// B = (beta*W*L^T + pi*L^T) (beta*L*L^T + I)^-1.
Eigen::MatrixXd update_b(const Eigen::MatrixXd& w, const Eigen::MatrixXd& l,
                         const Eigen::MatrixXd& pi, double beta);

// Gradient of the L subproblem's smooth objective
// G(L) = (beta/2) tr(L^T B^T B L) - tr((beta*W + pi)^T B L):
// beta*B^T*B*L - beta*B^T*W - B^T*pi.
Eigen::MatrixXd grad_g(const Eigen::MatrixXd& l, const Eigen::MatrixXd& b,
                       const Eigen::MatrixXd& w, const Eigen::MatrixXd& pi,
                       double beta);

// Euclidean projection of every column onto the L1 ball of radius 1.
// Exactly idempotent: columns already inside the ball are returned
// unchanged, and projected columns land strictly inside.
Eigen::MatrixXd project_columns_l1(const Eigen::MatrixXd& l);

// Minimizes G over the feasible set from start L0 by accelerated projected
// gradient with backtracking (omega doubles until the quadratic model
// majorizes G at the projected point) and stopping threshold
// chi = r*n*1e-12 on the extrapolation-to-iterate distance.
Eigen::MatrixXd solve_l(const Eigen::MatrixXd& b, const Eigen::MatrixXd& w,
                        const Eigen::MatrixXd& pi, double beta,
                        const Eigen::MatrixXd& l0, NesterovState& state,
                        Eigen::Index max_steps = 200);

// Feasible starting decomposition from the thin SVD: B = sqrt(rho)*U*Sigma,
// L = V/sqrt(rho) with rho = rank(W), zero-padded to width r. Exact
// factorization; every L column has L1 norm at most 1; objective equals
// rank * (sum of squared singular values). Requires r >= rank(W).
Decomposition svd_init(const WorkloadMatrix& w, Eigen::Index r);

// (alpha*B, L/alpha): the factorization product is unchanged and the
// product objective * l_sensitivity^2 is invariant.
Decomposition scale_decomposition(const Decomposition& d, double alpha);

double frobenius_residual(const Eigen::MatrixXd& w, const Eigen::MatrixXd& b,
                          const Eigen::MatrixXd& l);
double max_column_l1(const Eigen::MatrixXd& l);

}  // namespace dplr
