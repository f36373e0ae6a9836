#pragma once

#include <Eigen/Dense>

#include "decomposition.hpp"
#include "mechanisms.hpp"
#include "workload.hpp"

namespace dplr {

// Answers the batch through the factorization: B * (L*D + eta) with eta an
// r-vector of Laplace(l_sensitivity * unit / epsilon) draws. Refuses
// factorizations whose column sensitivity exceeds 1 + 1e-6, since the noise
// calibration would not cover them.
NoisyAnswer lrm_answer(const Decomposition& d, const Eigen::VectorXd& counts,
                       const PrivacyParams& p, Rng& rng, uint64_t seed = 0);

// Analytic expected total squared error of lrm_answer (noise term only):
// 2 * objective * l_sensitivity^2 * unit^2 / eps^2.
double expected_error_lrm(const Decomposition& d, const PrivacyParams& p);
Eigen::VectorXd expected_error_lrm_per_query(const Decomposition& d,
                                             const PrivacyParams& p);

// rank * (sum of squared singular values) / eps^2. Reported without the 2x
// Laplace-variance factor; comparisons elsewhere apply the factor uniformly.
double error_upper_bound(const SpectrumSummary& spectrum,
                         const PrivacyParams& p);

// ((2^rho / rho!) * product of singular values)^(2/rho) * rho^3 / eps^2,
// evaluated in log space. Order-of-magnitude only (asymptotic statement with
// its constant taken as 1); never a pass/fail oracle.
inline constexpr const char* kLowerBoundLabel = "order-of-magnitude only";
double error_lower_bound(const SpectrumSummary& spectrum,
                         const PrivacyParams& p);

// (condition_ratio/4)^2 * rank; the stated guarantee regime needs rank > 5.
struct ApproxRatioReport {
  double ratio = 0.0;
  bool in_regime = false;
};
ApproxRatioReport approx_ratio_report(const SpectrumSummary& spectrum);

// Data-dependent bound for an inexact factorization:
// 2 * objective * unit^2 / eps^2 + residual^2 * sum(counts^2), using the
// achieved residual rather than the allowance for sharpness.
double relaxed_error_bound(const Decomposition& d, const Eigen::VectorXd& counts,
                           const PrivacyParams& p);

}  // namespace dplr
