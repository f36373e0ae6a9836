#include "lrm.hpp"

#include <cmath>

#include "errors.hpp"

namespace dplr {

namespace {

void check_feasible(const Decomposition& d) {
  if (d.l_sensitivity > 1.0 + 1e-6) {
    throw InvalidArgument(
        "factorization column sensitivity exceeds 1 + 1e-6; answering with it "
        "would under-calibrate the noise");
  }
}

}  // namespace

NoisyAnswer lrm_answer(const Decomposition& d, const Eigen::VectorXd& counts,
                       const PrivacyParams& p, Rng& rng, uint64_t seed) {
  validate(p);
  check_feasible(d);
  if (d.l.cols() != counts.size()) {
    throw InvalidArgument("count vector length does not match factorization");
  }
  if (!counts.allFinite()) {
    throw InvalidArgument("count vector has non-finite entries");
  }
  const double scale = d.l_sensitivity * p.unit_sensitivity / p.epsilon;
  Eigen::VectorXd intermediate = d.l * counts;
  for (Eigen::Index i = 0; i < intermediate.size(); ++i) {
    intermediate(i) += laplace_or_zero(scale, rng);
  }
  return NoisyAnswer{d.b * intermediate, "LRM", seed};
}

double expected_error_lrm(const Decomposition& d, const PrivacyParams& p) {
  validate(p);
  const double noise = d.l_sensitivity * p.unit_sensitivity / p.epsilon;
  return 2.0 * d.objective * noise * noise;
}

Eigen::VectorXd expected_error_lrm_per_query(const Decomposition& d,
                                             const PrivacyParams& p) {
  validate(p);
  const double noise = d.l_sensitivity * p.unit_sensitivity / p.epsilon;
  return 2.0 * noise * noise * d.b.array().square().rowwise().sum().matrix();
}

double error_upper_bound(const SpectrumSummary& spectrum,
                         const PrivacyParams& p) {
  validate(p);
  if (spectrum.rank == 0) return 0.0;
  double sum_sq = 0.0;
  for (Eigen::Index k = 0; k < spectrum.rank; ++k) {
    sum_sq += spectrum.singular_values[static_cast<size_t>(k)] *
              spectrum.singular_values[static_cast<size_t>(k)];
  }
  return static_cast<double>(spectrum.rank) * sum_sq / (p.epsilon * p.epsilon);
}

double error_lower_bound(const SpectrumSummary& spectrum,
                         const PrivacyParams& p) {
  validate(p);
  const double rho = static_cast<double>(spectrum.rank);
  if (spectrum.rank == 0) return 0.0;
  // log of (2^rho / rho!) * prod(lambda), then the 2/rho power, in log space
  // to survive large rho.
  double log_term = rho * std::log(2.0) - std::lgamma(rho + 1.0);
  for (Eigen::Index k = 0; k < spectrum.rank; ++k) {
    log_term += std::log(spectrum.singular_values[static_cast<size_t>(k)]);
  }
  const double log_value = (2.0 / rho) * log_term + 3.0 * std::log(rho) -
                           2.0 * std::log(p.epsilon);
  return std::exp(log_value);
}

ApproxRatioReport approx_ratio_report(const SpectrumSummary& spectrum) {
  ApproxRatioReport out;
  const double quarter = spectrum.condition_ratio / 4.0;
  out.ratio = quarter * quarter * static_cast<double>(spectrum.rank);
  out.in_regime = spectrum.rank > 5;
  return out;
}

double relaxed_error_bound(const Decomposition& d, const Eigen::VectorXd& counts,
                           const PrivacyParams& p) {
  validate(p);
  const double unit_scale = p.unit_sensitivity / p.epsilon;
  return 2.0 * d.objective * unit_scale * unit_scale +
         d.residual * d.residual * counts.squaredNorm();
}

}  // namespace dplr
