#include "mechanisms.hpp"

#include <cmath>

#include "errors.hpp"

namespace dplr {

void validate(const PrivacyParams& p) {
  if (!(p.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(p.unit_sensitivity > 0.0)) {
    throw InvalidArgument("unit sensitivity must be positive");
  }
}

double laplace_sample(double scale, Rng& rng) {
  if (!(scale > 0.0)) throw InvalidArgument("Laplace scale must be positive");
  const double u = rng.uniform() - 0.5;
  return -scale * (u < 0.0 ? -1.0 : 1.0) * std::log1p(-2.0 * std::fabs(u));
}

double laplace_or_zero(double scale, Rng& rng) {
  if (scale < kNoNoiseScale) return 0.0;
  return laplace_sample(scale, rng);
}

namespace {

void check_pair(const WorkloadMatrix& w, const Eigen::VectorXd& d,
                const PrivacyParams& p) {
  validate(p);
  if (w.n() != d.size()) {
    throw InvalidArgument("count vector length does not match workload domain");
  }
  if (!d.allFinite()) throw InvalidArgument("count vector has non-finite entries");
  if (!w.entries.allFinite()) {
    throw InvalidArgument("workload matrix has non-finite entries");
  }
}

}  // namespace

NoisyAnswer noise_on_data(const WorkloadMatrix& w, const Eigen::VectorXd& d,
                          const PrivacyParams& p, Rng& rng, uint64_t seed) {
  check_pair(w, d, p);
  const double scale = p.unit_sensitivity / p.epsilon;
  Eigen::VectorXd noisy = d;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) {
    noisy(i) += laplace_or_zero(scale, rng);
  }
  return NoisyAnswer{w.entries * noisy, "NOD", seed};
}

NoisyAnswer noise_on_results(const WorkloadMatrix& w, const Eigen::VectorXd& d,
                             const PrivacyParams& p, Rng& rng, uint64_t seed) {
  check_pair(w, d, p);
  const double scale = sensitivity(w.entries) * p.unit_sensitivity / p.epsilon;
  Eigen::VectorXd answer = w.entries * d;
  for (Eigen::Index i = 0; i < answer.size(); ++i) {
    answer(i) += laplace_or_zero(scale, rng);
  }
  return NoisyAnswer{std::move(answer), "NOR", seed};
}

double expected_error_nod(const WorkloadMatrix& w, const PrivacyParams& p) {
  validate(p);
  const double unit_scale = p.unit_sensitivity / p.epsilon;
  return 2.0 * unit_scale * unit_scale * w.entries.squaredNorm();
}

Eigen::VectorXd expected_error_nod_per_query(const WorkloadMatrix& w,
                                             const PrivacyParams& p) {
  validate(p);
  const double unit_scale = p.unit_sensitivity / p.epsilon;
  return 2.0 * unit_scale * unit_scale *
         w.entries.array().square().rowwise().sum().matrix();
}

double expected_error_nor(const WorkloadMatrix& w, const PrivacyParams& p) {
  validate(p);
  const double batch = sensitivity(w.entries) * p.unit_sensitivity / p.epsilon;
  return 2.0 * static_cast<double>(w.m()) * batch * batch;
}

}  // namespace dplr
