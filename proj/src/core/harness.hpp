#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "decomposition.hpp"
#include "matrix_mechanism.hpp"
#include "workload.hpp"

namespace dplr {

enum class Mechanism { LRM, NOD, NOR, MM, WM, HM };

const char* mechanism_name(Mechanism mech);
Mechanism mechanism_from_name(const std::string& name);

struct DataSourceSpec {
  enum class Source { Synthetic, File };
  Source source = Source::Synthetic;
  std::string path;                  // File source
  Eigen::Index cardinality = 65536;  // Synthetic source
  double pareto_alpha = 1.2;
  double pareto_xm = 10.0;
  bool strict_negative_counts = true;
  std::string label() const;
};

struct WorkloadSource {
  std::optional<WorkloadSpec> spec;  // synthetic generator
  std::string file;                  // or a saved matrix
};

struct ExperimentConfig {
  DataSourceSpec data;
  WorkloadSource workload;
  std::vector<Mechanism> mechanisms = {Mechanism::LRM, Mechanism::NOD,
                                       Mechanism::NOR};
  std::vector<double> epsilons = {1.0, 0.1, 0.01};
  Eigen::Index trials = 20;
  std::vector<Eigen::Index> n_values = {1024};
  std::vector<Eigen::Index> m_values = {256};
  std::vector<Eigen::Index> s_values;      // empty: 0.5 * min(m, n)
  std::vector<double> gamma_values = {0.01};
  std::vector<double> r_multipliers = {1.2};
  double unit_sensitivity = 1.0;
  uint64_t master_seed = 0;
  Eigen::Index threads = 0;  // 0: hardware; DP_LOWRANK_THREADS caps either
  double cell_timeout_seconds = 600.0;
  bool report_timings = true;
  SolverConfig solver;  // gamma/r filled per cell from the grid
  MmConfig mm;
};

// One report row: a grid cell (including epsilon) crossed with a mechanism.
struct ErrorReport {
  std::string workload_kind;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index s = 0;
  double gamma = 0.0;
  double r_multiplier = 0.0;
  double epsilon = 0.0;
  std::string data_label;
  Eigen::Index trials = 0;
  std::string mechanism_id;
  double total_sq_error = 0.0;      // mean over trials of ||answer - WD||^2
  double per_query_sq_error = 0.0;  // the same divided by m
  double decompose_time = 0.0;      // precomputation seconds (shared per cell)
  double answer_time = 0.0;         // seconds across this row's trials
  bool converged = true;
  std::string error;  // empty on success
};

std::vector<ErrorReport> run_experiment(const ExperimentConfig& cfg);

void emit_csv(const std::vector<ErrorReport>& reports, std::ostream& out);
void emit_json(const std::vector<ErrorReport>& reports, std::ostream& out);

// Reads the documented JSON config schema (see README).
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Worker-pool width after applying the DP_LOWRANK_THREADS cap.
Eigen::Index effective_threads(Eigen::Index requested);

}  // namespace dplr
