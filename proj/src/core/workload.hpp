#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dplr {

enum class WorkloadKind { Discrete, Range, Related };

const char* workload_kind_name(WorkloadKind kind);
WorkloadKind workload_kind_from_name(const std::string& name);

// Parameters of a synthetic workload generator; `p` applies to Discrete
// (probability of a +1 entry), `s` to Related (number of base queries).
struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::Range;
  Eigen::Index m = 1;
  Eigen::Index n = 1;
  double p = 0.02;
  Eigen::Index s = 0;
  uint64_t seed = 0;
};

// A batch of m linear counting queries over a domain of n unit counts;
// row i holds the coefficient vector of query i.
struct WorkloadMatrix {
  Eigen::MatrixXd entries;
  std::string name;
  std::optional<WorkloadSpec> spec;

  Eigen::Index m() const { return entries.rows(); }
  Eigen::Index n() const { return entries.cols(); }
};

struct SpectrumSummary {
  std::vector<double> singular_values;  // non-increasing
  Eigen::Index rank = 0;                // values above 1e-10 * largest
  double condition_ratio = 0.0;         // largest / smallest counted value
};

struct SvdResult {
  Eigen::MatrixXd u;      // m x s, orthonormal columns
  Eigen::VectorXd sigma;  // s, non-increasing
  Eigen::MatrixXd v;      // s x n, orthonormal rows
  SpectrumSummary summary;
};

// Relative singular-value cutoff for numerical rank.
inline constexpr double kRankThreshold = 1e-10;

SvdResult svd(const WorkloadMatrix& w);
SpectrumSummary spectrum(const WorkloadMatrix& w);

// Maximum column absolute sum: the L1 sensitivity of the exact batch
// answers to a unit change in one count.
double sensitivity(const Eigen::MatrixXd& w);

WorkloadMatrix gen_wdiscrete(const WorkloadSpec& spec);
WorkloadMatrix gen_wrange(const WorkloadSpec& spec);
WorkloadMatrix gen_wrelated(const WorkloadSpec& spec);
WorkloadMatrix generate_workload(const WorkloadSpec& spec);

// Merges a raw count vector into n consecutive groups of near-equal size
// (sizes differ by at most one; longer groups first), summing each group.
Eigen::VectorXd coarsen(const Eigen::VectorXd& raw, Eigen::Index n);

// Synthetic heavy-tailed counts standing in for real datasets: Pareto
// draws floor(xm * u^(-1/alpha)) capped at `cap`.
Eigen::VectorXd synthetic_counts(Eigen::Index cardinality, uint64_t seed,
                                 double alpha = 1.2, double xm = 10.0,
                                 double cap = 1e6);

}  // namespace dplr
