#include "io.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace dplr {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

namespace {

double parse_double(const std::string& token, const std::string& path,
                    size_t line_number) {
  size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &consumed);
  } catch (const std::exception&) {
    throw IoError(path + ":" + std::to_string(line_number) +
                  ": not a number: '" + token + "'");
  }
  while (consumed < token.size() &&
         std::isspace(static_cast<unsigned char>(token[consumed]))) {
    ++consumed;
  }
  if (consumed != token.size()) {
    throw IoError(path + ":" + std::to_string(line_number) +
                  ": trailing characters after number: '" + token + "'");
  }
  return value;
}

std::string strip(const std::string& text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
    --end;
  }
  return text.substr(begin, end - begin);
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  json parsed;
  try {
    in >> parsed;
  } catch (const std::exception& e) {
    throw IoError("invalid JSON in " + path + ": " + e.what());
  }
  return parsed;
}

void save_json(const json& value, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << value.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string text = strip(line);
    if (text.empty()) continue;
    std::vector<double> row;
    std::stringstream cells(text);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      row.push_back(parse_double(strip(cell), path, line_number));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path + ":" + std::to_string(line_number) +
                    ": ragged row (expected " +
                    std::to_string(rows.front().size()) + " columns, found " +
                    std::to_string(row.size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty matrix file");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows.front().size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void save_workload(const WorkloadMatrix& w, const std::string& prefix) {
  save_matrix_csv(prefix + ".csv", w.entries);
  json meta;
  meta["m"] = w.m();
  meta["n"] = w.n();
  meta["name"] = w.name;
  if (w.spec) {
    meta["kind"] = workload_kind_name(w.spec->kind);
    meta["seed"] = w.spec->seed;
    if (w.spec->kind == WorkloadKind::Discrete) meta["p"] = w.spec->p;
    if (w.spec->kind == WorkloadKind::Related) meta["s"] = w.spec->s;
  }
  save_json(meta, prefix + ".meta.json");
}

WorkloadMatrix load_workload(const std::string& path) {
  WorkloadMatrix w;
  w.entries = load_matrix_csv(path);
  w.name = fs::path(path).stem().string();

  std::string meta_path;
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
    meta_path = path.substr(0, path.size() - 4) + ".meta.json";
  }
  if (!meta_path.empty() && fs::exists(meta_path)) {
    const json meta = load_json(meta_path);
    if (meta.contains("name")) w.name = meta["name"].get<std::string>();
    if (meta.contains("kind")) {
      WorkloadSpec spec;
      spec.kind = workload_kind_from_name(meta["kind"].get<std::string>());
      spec.m = w.m();
      spec.n = w.n();
      if (meta.contains("seed")) spec.seed = meta["seed"].get<uint64_t>();
      if (meta.contains("p")) spec.p = meta["p"].get<double>();
      if (meta.contains("s")) spec.s = meta["s"].get<Eigen::Index>();
      w.spec = spec;
    }
  }
  return w;
}

void save_decomposition(const Decomposition& d, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir);
  save_matrix_csv((fs::path(dir) / "B.csv").string(), d.b);
  save_matrix_csv((fs::path(dir) / "L.csv").string(), d.l);
  json meta;
  meta["r"] = d.r;
  meta["gamma"] = d.gamma;
  meta["residual"] = d.residual;
  meta["objective"] = d.objective;
  meta["scale"] = d.scale;
  meta["l_sensitivity"] = d.l_sensitivity;
  meta["iterations"] = d.iterations;
  meta["converged"] = d.converged;
  save_json(meta, (fs::path(dir) / "meta.json").string());
}

Decomposition load_decomposition(const std::string& dir) {
  Decomposition d;
  d.b = load_matrix_csv((fs::path(dir) / "B.csv").string());
  d.l = load_matrix_csv((fs::path(dir) / "L.csv").string());
  if (d.b.cols() != d.l.rows()) {
    throw IoError(dir + ": B and L have incompatible inner dimensions");
  }
  const json meta = load_json((fs::path(dir) / "meta.json").string());
  d.r = d.l.rows();
  d.gamma = meta.value("gamma", 0.0);
  d.residual = meta.value("residual", 0.0);
  d.iterations = meta.value("iterations", Eigen::Index{0});
  d.converged = meta.value("converged", false);
  // Derived quantities are recomputed from the matrices, not trusted.
  d.objective = d.b.squaredNorm();
  d.scale = d.objective;
  d.l_sensitivity = max_column_l1(d.l);
  return d;
}

void save_strategy(const StrategyMatrix& s, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir);
  save_matrix_csv((fs::path(dir) / "A.csv").string(), s.a);
  json meta;
  meta["sensitivity"] = s.sensitivity_a;
  meta["iterations"] = s.iterations;
  meta["objective"] = s.objective;
  meta["converged"] = s.converged;
  save_json(meta, (fs::path(dir) / "meta.json").string());
}

StrategyMatrix load_strategy(const std::string& dir) {
  StrategyMatrix s;
  s.a = load_matrix_csv((fs::path(dir) / "A.csv").string());
  const json meta = load_json((fs::path(dir) / "meta.json").string());
  s.iterations = meta.value("iterations", Eigen::Index{0});
  s.objective = meta.value("objective", 0.0);
  s.converged = meta.value("converged", false);
  s.sensitivity_a = sensitivity(s.a);
  return s;
}

Eigen::VectorXd load_counts(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<double> values;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string text = strip(line);
    if (text.empty()) continue;
    // Tolerate a single-column CSV's trailing comma.
    if (!text.empty() && text.back() == ',') text.pop_back();
    double value = parse_double(strip(text), path, line_number);
    if (value < 0.0) {
      if (strict) {
        throw IoError(path + ":" + std::to_string(line_number) +
                      ": negative count " + format_double(value));
      }
      std::cerr << "warning: " << path << ":" << line_number
                << ": negative count " << format_double(value)
                << " clamped to 0\n";
      value = 0.0;
    }
    values.push_back(value);
  }
  if (values.empty()) throw IoError(path + ": no counts found");
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

}  // namespace dplr
