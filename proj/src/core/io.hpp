#pragma once

#include <Eigen/Dense>
#include <string>

#include "decomposition.hpp"
#include "matrix_mechanism.hpp"
#include "workload.hpp"

namespace dplr {

// All numeric round trips use "%.17g" so values survive save/load exactly.
std::string format_double(double value);

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix_csv(const std::string& path);

// Writes <prefix>.csv (the matrix) and <prefix>.meta.json (kind, m, n,
// seed, p, s when the workload came from a generator).
void save_workload(const WorkloadMatrix& w, const std::string& prefix);

// Loads <path> as the matrix; when <path> ends in ".csv" and a sibling
// ".meta.json" exists, the generator metadata is attached.
WorkloadMatrix load_workload(const std::string& path);

// Directory layout: B.csv, L.csv, meta.json (r, gamma, residual,
// objective, iterations, converged).
void save_decomposition(const Decomposition& d, const std::string& dir);
Decomposition load_decomposition(const std::string& dir);

// Directory layout: A.csv, meta.json (sensitivity, iterations, objective,
// converged).
void save_strategy(const StrategyMatrix& s, const std::string& dir);
StrategyMatrix load_strategy(const std::string& dir);

// One non-negative count per line (plain text or single-column CSV).
// strict=true: a negative value is an input error naming its line;
// strict=false: a warning naming the line goes to stderr and the value is
// clamped to zero.
Eigen::VectorXd load_counts(const std::string& path, bool strict = true);

}  // namespace dplr
