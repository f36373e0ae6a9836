#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "rng.hpp"
#include "workload.hpp"

namespace dplr {

// Privacy budget and the per-record L1 sensitivity of the unit counts
// (1 for plain counting queries).
struct PrivacyParams {
  double epsilon = 1.0;
  double unit_sensitivity = 1.0;
};

void validate(const PrivacyParams& p);

struct NoisyAnswer {
  Eigen::VectorXd values;
  std::string mechanism_id;
  uint64_t seed = 0;
};

// Scales below this emit exact answers: the no-noise limit used for
// deterministic tests and the epsilon -> infinity regime.
inline constexpr double kNoNoiseScale = 1e-12;

// One draw from the zero-mean Laplace density with the given scale
// (variance 2 * scale^2). Requires scale > 0.
double laplace_sample(double scale, Rng& rng);

// Laplace draw that treats near-zero scales as exactly zero noise.
double laplace_or_zero(double scale, Rng& rng);

// Perturbs the counts with Laplace(unit_sensitivity/epsilon) noise and
// answers every query from the noisy counts: W * (D + eta).
NoisyAnswer noise_on_data(const WorkloadMatrix& w, const Eigen::VectorXd& d,
                          const PrivacyParams& p, Rng& rng, uint64_t seed = 0);

// Answers exactly and perturbs the results with noise calibrated to the
// whole batch's sensitivity: W * D + eta.
NoisyAnswer noise_on_results(const WorkloadMatrix& w, const Eigen::VectorXd& d,
                             const PrivacyParams& p, Rng& rng,
                             uint64_t seed = 0);

// Analytic expected total squared error of noise_on_data over all m
// answers: (2 * unit^2 / eps^2) * sum of squared entries of W.
double expected_error_nod(const WorkloadMatrix& w, const PrivacyParams& p);
Eigen::VectorXd expected_error_nod_per_query(const WorkloadMatrix& w,
                                             const PrivacyParams& p);

// Analytic expected total squared error of noise_on_results:
// 2 * m * (sensitivity(W) * unit)^2 / eps^2.
double expected_error_nor(const WorkloadMatrix& w, const PrivacyParams& p);

}  // namespace dplr
