#include <doctest.h>

#include <Eigen/Dense>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/decomposition.hpp"
#include "core/errors.hpp"
#include "core/harness.hpp"
#include "core/io.hpp"
#include "core/rng.hpp"
#include "core/workload.hpp"
#include "test_common.hpp"

using namespace dplr;
namespace fs = std::filesystem;

namespace {

// Unique scratch directory removed (recursively) when the fixture dies.
struct TempDir {
  fs::path path;

  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("dplr_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

// Saves and restores one environment variable around a test body.
struct EnvGuard {
  std::string name;
  bool had = false;
  std::string old;

  explicit EnvGuard(const char* variable) : name(variable) {
    if (const char* value = std::getenv(variable)) {
      had = true;
      old = value;
    }
  }
  void set(const std::string& value) { ::setenv(name.c_str(), value.c_str(), 1); }
  void unset() { ::unsetenv(name.c_str()); }
  ~EnvGuard() {
    if (had) {
      ::setenv(name.c_str(), old.c_str(), 1);
    } else {
      ::unsetenv(name.c_str());
    }
  }
};

const ErrorReport* find_row(const std::vector<ErrorReport>& rows,
                            const std::string& mechanism) {
  for (const ErrorReport& r : rows) {
    if (r.mechanism_id == mechanism) return &r;
  }
  return nullptr;
}

std::string csv_of(const std::vector<ErrorReport>& rows) {
  std::ostringstream out;
  emit_csv(rows, out);
  return out.str();
}

}  // namespace

TEST_CASE("format_double survives a parse round trip exactly") {
  const double values[] = {0.0,
                           -0.0,
                           1.0 / 3.0,
                           0.1,
                           -2.5e-17,
                           1e300,
                           -1e-300,
                           12345678901234567.0,
                           3.141592653589793,
                           -0.49999999999999994};
  for (double v : values) {
    const std::string text = format_double(v);
    CHECK(std::stod(text) == v);
  }
}

TEST_CASE("matrix CSV round trip is bit exact") {
  TempDir tmp;
  Rng rng(77);
  Eigen::MatrixXd m(7, 5);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = (rng.normal() + 1e-3) * std::pow(10.0, (i + j) % 7 - 3);
    }
  }
  m(0, 0) = 0.0;
  m(1, 1) = -1.0 / 3.0;
  const std::string path = tmp.file("m.csv");
  save_matrix_csv(path, m);
  const Eigen::MatrixXd back = load_matrix_csv(path);
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  CHECK(back == m);
}

TEST_CASE("matrix CSV loader reports precise failures") {
  TempDir tmp;

  CHECK_THROWS_WITH_AS(load_matrix_csv(tmp.file("missing.csv")),
                       doctest::Contains("cannot open"), IoError);

  const std::string empty = tmp.file("empty.csv");
  write_text(empty, "\n  \n");
  CHECK_THROWS_WITH_AS(load_matrix_csv(empty),
                       doctest::Contains("empty matrix file"), IoError);

  const std::string ragged = tmp.file("ragged.csv");
  write_text(ragged, "1,2,3\n4,5,6\n7,8\n");
  CHECK_THROWS_WITH_AS(load_matrix_csv(ragged), doctest::Contains(":3: ragged row"),
                       IoError);

  const std::string bad = tmp.file("bad.csv");
  write_text(bad, "1,2\nx,4\n");
  CHECK_THROWS_WITH_AS(load_matrix_csv(bad), doctest::Contains(":2: not a number"),
                       IoError);

  const std::string trailing = tmp.file("trailing.csv");
  write_text(trailing, "1,2\n3,4kg\n");
  CHECK_THROWS_WITH_AS(load_matrix_csv(trailing),
                       doctest::Contains(":2: trailing characters"), IoError);
}

TEST_CASE("matrix CSV loader skips blank lines and strips spaces") {
  TempDir tmp;
  const std::string path = tmp.file("m.csv");
  write_text(path, "\n 1 , 2 \n\n3,4\n\n");
  const Eigen::MatrixXd m = load_matrix_csv(path);
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 2);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 1) == 4.0);
}

TEST_CASE("workload round trip preserves entries and generator settings") {
  TempDir tmp;
  WorkloadSpec spec;
  spec.kind = WorkloadKind::Related;
  spec.m = 6;
  spec.n = 9;
  spec.s = 3;
  spec.seed = 404;
  const WorkloadMatrix w = gen_wrelated(spec);

  const std::string prefix = tmp.file("related_w");
  save_workload(w, prefix);
  const WorkloadMatrix back = load_workload(prefix + ".csv");

  CHECK(back.entries == w.entries);
  CHECK(back.name == "related");
  REQUIRE(back.spec.has_value());
  CHECK(back.spec->kind == WorkloadKind::Related);
  CHECK(back.spec->s == 3);
  CHECK(back.spec->seed == 404);
  CHECK(back.spec->m == 6);
  CHECK(back.spec->n == 9);
}

TEST_CASE("a bare matrix file loads as a workload named after the file") {
  TempDir tmp;
  const std::string path = tmp.file("queries.csv");
  save_matrix_csv(path, fixtures::example_a());
  const WorkloadMatrix w = load_workload(path);
  CHECK(w.entries == fixtures::example_a());
  CHECK(w.name == "queries");
  CHECK_FALSE(w.spec.has_value());
}

TEST_CASE("decomposition round trip recomputes derived quantities") {
  TempDir tmp;
  WorkloadMatrix w{fixtures::example_b(), "b", std::nullopt};
  Decomposition d = svd_init(w, 3);
  d.gamma = 0.125;
  d.iterations = 17;
  d.converged = true;
  // Poison the derived fields before saving; the loader must not trust them.
  Decomposition poisoned = d;
  poisoned.objective = -1.0;
  poisoned.scale = -1.0;
  poisoned.l_sensitivity = -1.0;

  const std::string dir = tmp.file("dec");
  save_decomposition(poisoned, dir);
  const Decomposition back = load_decomposition(dir);

  CHECK(back.b == d.b);
  CHECK(back.l == d.l);
  CHECK(back.r == d.l.rows());
  CHECK(back.gamma == 0.125);
  CHECK(back.iterations == 17);
  CHECK(back.converged);
  CHECK(back.objective == d.b.squaredNorm());
  CHECK(back.scale == back.objective);
  CHECK(back.l_sensitivity == max_column_l1(d.l));
}

TEST_CASE("decomposition loader rejects mismatched factor shapes") {
  TempDir tmp;
  WorkloadMatrix w{fixtures::example_b(), "b", std::nullopt};
  const Decomposition d = svd_init(w, 3);
  const std::string dir = tmp.file("dec");
  save_decomposition(d, dir);
  // Overwrite L with a factor whose row count no longer matches B's columns.
  save_matrix_csv((fs::path(dir) / "L.csv").string(),
                  Eigen::MatrixXd::Identity(2, 4));
  CHECK_THROWS_WITH_AS(load_decomposition(dir),
                       doctest::Contains("incompatible inner dimensions"),
                       IoError);
}

TEST_CASE("strategy round trip recomputes the sensitivity") {
  TempDir tmp;
  StrategyMatrix s;
  s.a = fixtures::example_b();  // column absolute sums (1, 3, 3, 5)
  s.sensitivity_a = -99.0;      // must be ignored by the loader
  s.iterations = 12;
  s.objective = 2.5;
  s.converged = true;

  const std::string dir = tmp.file("strategy");
  save_strategy(s, dir);
  const StrategyMatrix back = load_strategy(dir);

  CHECK(back.a == s.a);
  CHECK(back.iterations == 12);
  CHECK(back.objective == 2.5);
  CHECK(back.converged);
  CHECK(back.sensitivity_a == 5.0);
}

TEST_CASE("count files load one value per line") {
  TempDir tmp;
  const std::string path = tmp.file("counts.txt");
  write_text(path, "1\n2\n\n3\n");
  const Eigen::VectorXd counts = load_counts(path);
  REQUIRE(counts.size() == 3);
  CHECK(counts(0) == 1.0);
  CHECK(counts(1) == 2.0);
  CHECK(counts(2) == 3.0);
}

TEST_CASE("count loader tolerates a single-column CSV's trailing commas") {
  TempDir tmp;
  const std::string path = tmp.file("counts.csv");
  write_text(path, "4,\n5,\n");
  const Eigen::VectorXd counts = load_counts(path);
  REQUIRE(counts.size() == 2);
  CHECK(counts(0) == 4.0);
  CHECK(counts(1) == 5.0);
}

TEST_CASE("count loader failure modes") {
  TempDir tmp;

  const std::string empty = tmp.file("empty.txt");
  write_text(empty, "\n\n");
  CHECK_THROWS_WITH_AS(load_counts(empty), doctest::Contains("no counts found"),
                       IoError);

  const std::string negative = tmp.file("negative.txt");
  write_text(negative, "3\n-2\n1\n");
  CHECK_THROWS_WITH_AS(load_counts(negative, true),
                       doctest::Contains(":2: negative count"), IoError);

  // Non-strict mode clamps the offending line to zero instead of throwing.
  const Eigen::VectorXd clamped = load_counts(negative, false);
  REQUIRE(clamped.size() == 3);
  CHECK(clamped(0) == 3.0);
  CHECK(clamped(1) == 0.0);
  CHECK(clamped(2) == 1.0);

  const std::string bad = tmp.file("bad.txt");
  write_text(bad, "1\ntwo\n");
  CHECK_THROWS_WITH_AS(load_counts(bad), doctest::Contains(":2: not a number"),
                       IoError);
}

TEST_CASE("mechanism names round trip and parse case-insensitively") {
  const Mechanism all[] = {Mechanism::LRM, Mechanism::NOD, Mechanism::NOR,
                           Mechanism::MM, Mechanism::WM, Mechanism::HM};
  for (Mechanism mech : all) {
    CHECK(mechanism_from_name(mechanism_name(mech)) == mech);
  }
  CHECK(mechanism_from_name("lrm") == Mechanism::LRM);
  CHECK(mechanism_from_name("hm") == Mechanism::HM);
  CHECK_THROWS_WITH_AS(mechanism_from_name("laplace"),
                       doctest::Contains("unknown mechanism"), InvalidArgument);
}

TEST_CASE("data source labels") {
  DataSourceSpec synthetic;
  CHECK(synthetic.label() == "pareto(a=1.2,xm=10,N=65536)");

  DataSourceSpec file;
  file.source = DataSourceSpec::Source::File;
  file.path = "/data/counts.txt";
  CHECK(file.label() == "file:/data/counts.txt");
}

TEST_CASE("worker pool width respects the environment cap") {
  EnvGuard guard("DP_LOWRANK_THREADS");

  guard.unset();
  CHECK(effective_threads(5) == 5);
  CHECK(effective_threads(1) == 1);
  CHECK(effective_threads(0) >= 1);

  guard.set("2");
  CHECK(effective_threads(8) == 2);
  CHECK(effective_threads(1) == 1);
  CHECK(effective_threads(0) <= 2);
  CHECK(effective_threads(0) >= 1);

  // Zero, negative, or unparsable values leave the request alone.
  guard.set("0");
  CHECK(effective_threads(6) == 6);
  guard.set("-3");
  CHECK(effective_threads(6) == 6);
  guard.set("abc");
  CHECK(effective_threads(6) == 6);
  guard.set("4x");
  CHECK(effective_threads(6) == 6);
}

TEST_CASE("minimal experiment config fills every default") {
  const ExperimentConfig cfg =
      parse_experiment_config(R"({"workload": {"kind": "range"}})");

  REQUIRE(cfg.workload.spec.has_value());
  CHECK(cfg.workload.spec->kind == WorkloadKind::Range);
  CHECK(cfg.workload.file.empty());
  REQUIRE(cfg.mechanisms.size() == 3);
  CHECK(cfg.mechanisms[0] == Mechanism::LRM);
  CHECK(cfg.mechanisms[1] == Mechanism::NOD);
  CHECK(cfg.mechanisms[2] == Mechanism::NOR);
  REQUIRE(cfg.epsilons.size() == 3);
  CHECK(cfg.epsilons[0] == 1.0);
  CHECK(cfg.epsilons[1] == 0.1);
  CHECK(cfg.epsilons[2] == 0.01);
  CHECK(cfg.trials == 20);
  CHECK(cfg.n_values == std::vector<Eigen::Index>{1024});
  CHECK(cfg.m_values == std::vector<Eigen::Index>{256});
  CHECK(cfg.s_values.empty());
  CHECK(cfg.gamma_values == std::vector<double>{0.01});
  CHECK(cfg.r_multipliers == std::vector<double>{1.2});
  CHECK(cfg.unit_sensitivity == 1.0);
  CHECK(cfg.master_seed == 0);
  CHECK(cfg.threads == 0);
  CHECK(cfg.cell_timeout_seconds == 600.0);
  CHECK(cfg.report_timings);
  CHECK(cfg.data.source == DataSourceSpec::Source::Synthetic);
  CHECK(cfg.data.cardinality == 65536);
}

TEST_CASE("experiment config rejects unknown keys at every level") {
  CHECK_THROWS_WITH_AS(
      parse_experiment_config(R"({"workload": {"kind": "range"}, "foo": 1})"),
      doctest::Contains("unknown key \"foo\""), InvalidArgument);
  CHECK_THROWS_WITH_AS(
      parse_experiment_config(
          R"({"workload": {"kind": "range", "width": 3}})"),
      doctest::Contains("unknown key \"width\""), InvalidArgument);
  CHECK_THROWS_WITH_AS(
      parse_experiment_config(
          R"({"workload": {"kind": "range"}, "solver": {"steps": 5}})"),
      doctest::Contains("unknown key \"steps\""), InvalidArgument);
  CHECK_THROWS_WITH_AS(
      parse_experiment_config(
          R"({"workload": {"kind": "range"}, "mm": {"mu": 0.1}})"),
      doctest::Contains("unknown key \"mu\""), InvalidArgument);
  CHECK_THROWS_WITH_AS(
      parse_experiment_config(
          R"({"workload": {"kind": "range"},
              "data": {"cardinality": 10, "shape": 2}})"),
      doctest::Contains("unknown key \"shape\""), InvalidArgument);
  // A workload may name a generator or a file, never both.
  CHECK_THROWS_WITH_AS(
      parse_experiment_config(
          R"({"workload": {"kind": "range", "file": "w.csv"}})"),
      doctest::Contains("unknown key \"kind\""), InvalidArgument);
}

TEST_CASE("experiment config validation failures carry the common prefix") {
  const char* bad_configs[] = {
      R"({})",
      R"({"workload": {}})",
      R"({"workload": {"kind": "range"}, "trials": 0})",
      R"({"workload": {"kind": "range"}, "epsilons": [1.0, -0.5]})",
      R"({"workload": {"kind": "range"}, "epsilons": []})",
      R"({"workload": {"kind": "range"}, "mechanisms": []})",
      R"({"workload": {"kind": "range"}, "master_seed": 1.5})",
      R"({"workload": {"kind": "range"}, "master_seed": "seven"})",
      R"({"workload": {"kind": "range"}, "n": 16.5})",
      R"({"workload": {"kind": "range"}, "gamma": -0.5})",
      R"({"workload": {"kind": "range"}, "r_multiplier": 0})",
      R"({"workload": {"kind": "range"}, "threads": -1})",
      R"({"workload": {"kind": "range"}, "unit_sensitivity": 0})",
      R"(not json at all)",
  };
  for (const char* text : bad_configs) {
    CAPTURE(text);
    CHECK_THROWS_WITH_AS(parse_experiment_config(text),
                         doctest::Contains("experiment config: "),
                         InvalidArgument);
  }
  CHECK_THROWS_WITH_AS(
      parse_experiment_config(
          R"({"workload": {"kind": "range"}, "mechanisms": ["XX"]})"),
      doctest::Contains("unknown mechanism"), InvalidArgument);
}

TEST_CASE("experiment config accepts scalars where lists are allowed") {
  const ExperimentConfig cfg = parse_experiment_config(
      R"({"workload": {"kind": "related"},
          "epsilons": 0.5, "n": 32, "m": 8, "s": [2, 4],
          "gamma": [0.1, 0.2], "r_multiplier": 1.5})");
  CHECK(cfg.epsilons == std::vector<double>{0.5});
  CHECK(cfg.n_values == std::vector<Eigen::Index>{32});
  CHECK(cfg.m_values == std::vector<Eigen::Index>{8});
  CHECK(cfg.s_values == std::vector<Eigen::Index>{2, 4});
  CHECK(cfg.gamma_values == std::vector<double>{0.1, 0.2});
  CHECK(cfg.r_multipliers == std::vector<double>{1.5});
}

TEST_CASE("experiment config forwards solver, mm, and data overrides") {
  const ExperimentConfig cfg = parse_experiment_config(
      R"({"workload": {"kind": "discrete", "p": 0.1},
          "data": {"cardinality": 1000, "pareto_alpha": 1.5},
          "solver": {"outer_max": 55, "residual_tol": 0.5, "beta0": 2.0},
          "mm": {"max_iters": 77, "window": 4},
          "master_seed": 99, "report_timings": false})");
  REQUIRE(cfg.workload.spec.has_value());
  CHECK(cfg.workload.spec->kind == WorkloadKind::Discrete);
  CHECK(cfg.workload.spec->p == 0.1);
  CHECK(cfg.data.cardinality == 1000);
  CHECK(cfg.data.pareto_alpha == 1.5);
  CHECK(cfg.data.label() == "pareto(a=1.5,xm=10,N=1000)");
  CHECK(cfg.solver.outer_max == 55);
  CHECK(cfg.solver.residual_tol == 0.5);
  CHECK(cfg.solver.beta0 == 2.0);
  CHECK(cfg.mm.max_iters == 77);
  CHECK(cfg.mm.window == 4);
  CHECK(cfg.master_seed == 99);
  CHECK_FALSE(cfg.report_timings);
}

TEST_CASE("experiment config reads file data sources") {
  const ExperimentConfig cfg = parse_experiment_config(
      R"({"workload": {"kind": "range"},
          "data": {"file": "/tmp/x.txt", "strict": false}})");
  CHECK(cfg.data.source == DataSourceSpec::Source::File);
  CHECK(cfg.data.path == "/tmp/x.txt");
  CHECK_FALSE(cfg.data.strict_negative_counts);

  CHECK_THROWS_WITH_AS(
      parse_experiment_config(
          R"({"workload": {"kind": "range"}, "data": {"file": ""}})"),
      doctest::Contains("file data source needs a path"), InvalidArgument);
}

TEST_CASE("loading a missing experiment config names the file") {
  CHECK_THROWS_WITH_AS(load_experiment_config("/nonexistent/config.json"),
                       doctest::Contains("cannot open experiment config"),
                       IoError);
}

TEST_CASE("report rows follow the documented grid order") {
  TempDir tmp;
  write_text(tmp.file("counts.txt"), "5\n1\n4\n2\n3\n1\n2\n8\n");
  std::ostringstream config;
  config << R"({"workload": {"kind": "range"}, "n": 8, "m": 3,
                "epsilons": [1.0, 0.25], "mechanisms": ["NOD", "NOR"],
                "trials": 2, "data": {"file": ")"
         << tmp.file("counts.txt") << R"("}})";
  const std::vector<ErrorReport> rows =
      run_experiment(parse_experiment_config(config.str()));

  REQUIRE(rows.size() == 4);
  CHECK(rows[0].epsilon == 1.0);
  CHECK(rows[0].mechanism_id == "NOD");
  CHECK(rows[1].epsilon == 1.0);
  CHECK(rows[1].mechanism_id == "NOR");
  CHECK(rows[2].epsilon == 0.25);
  CHECK(rows[2].mechanism_id == "NOD");
  CHECK(rows[3].epsilon == 0.25);
  CHECK(rows[3].mechanism_id == "NOR");
  for (const ErrorReport& r : rows) {
    CHECK(r.workload_kind == "range");
    CHECK(r.n == 8);
    CHECK(r.m == 3);
    CHECK(r.s == 0);
    CHECK(r.trials == 2);
    CHECK(r.data_label == "file:" + tmp.file("counts.txt"));
    CHECK(r.error.empty());
    CHECK(r.converged);
  }
}

TEST_CASE("noise-on-data rows match the closed-form error of a file workload") {
  TempDir tmp;
  WorkloadSpec spec;
  spec.kind = WorkloadKind::Range;
  spec.m = 8;
  spec.n = 32;
  spec.seed = 5;
  const WorkloadMatrix w = gen_wrange(spec);
  const std::string prefix = tmp.file("w");
  save_workload(w, prefix);

  std::ostringstream config;
  config << R"({"workload": {"file": ")" << prefix << R"(.csv"},
                "mechanisms": ["NOD"], "epsilons": 1.0, "trials": 40000,
                "master_seed": 17})";
  const std::vector<ErrorReport> rows =
      run_experiment(parse_experiment_config(config.str()));

  REQUIRE(rows.size() == 1);
  const ErrorReport& row = rows[0];
  CHECK(row.workload_kind == "range");
  CHECK(row.n == 32);
  CHECK(row.m == 8);
  CHECK(row.trials == 40000);
  CHECK(row.error.empty());
  // Per-cell noise makes the total error 2 (unit/eps)^2 ||W||_F^2,
  // independent of the counts.
  const double expected = 2.0 * w.entries.squaredNorm();
  CHECK(row.total_sq_error == doctest::Approx(expected).epsilon(0.02));
  CHECK(row.per_query_sq_error ==
        doctest::Approx(row.total_sq_error / 8.0).epsilon(1e-12));
}

TEST_CASE("experiment output is reproducible and thread-width independent") {
  const char* config_text =
      R"({"workload": {"kind": "related"}, "n": 32, "m": 12, "s": 3,
          "gamma": 0.001, "r_multiplier": 1.2,
          "epsilons": [1.0, 0.5], "mechanisms": ["LRM", "NOD", "NOR"],
          "trials": 5, "master_seed": 42, "report_timings": false})";

  ExperimentConfig cfg = parse_experiment_config(config_text);
  const std::string first = csv_of(run_experiment(cfg));
  const std::string second = csv_of(run_experiment(cfg));
  CHECK(first == second);

  cfg.threads = 1;
  const std::string serial = csv_of(run_experiment(cfg));
  cfg.threads = 4;
  const std::string parallel = csv_of(run_experiment(cfg));
  CHECK(serial == first);
  CHECK(parallel == first);
}

TEST_CASE("low-rank rows beat per-cell noise on a low-rank workload") {
  // The residual allowance must be tight relative to the count magnitudes:
  // answering bias scales with (residual * ||counts||)^2, and desk-scale
  // synthetic counts are large, so a loose allowance would swamp the noise
  // comparison this test is about.
  const ExperimentConfig cfg = parse_experiment_config(
      R"({"workload": {"kind": "related"}, "n": 64, "m": 24, "s": 4,
          "gamma": 1e-6, "r_multiplier": 1.2, "epsilons": 0.5,
          "mechanisms": ["LRM", "NOD"], "trials": 50, "master_seed": 3,
          "report_timings": false})");
  const std::vector<ErrorReport> rows = run_experiment(cfg);

  const ErrorReport* lrm = find_row(rows, "LRM");
  const ErrorReport* nod = find_row(rows, "NOD");
  REQUIRE(lrm != nullptr);
  REQUIRE(nod != nullptr);
  CHECK(lrm->error.empty());
  CHECK(lrm->converged);
  CHECK(lrm->s == 4);
  // The gamma column repeats the configured relative residual allowance.
  CHECK(lrm->gamma == 1e-6);
  CHECK(lrm->r_multiplier == 1.2);
  CHECK(lrm->total_sq_error < nod->total_sq_error);
}

TEST_CASE("base-query grid collapses for kinds without base queries") {
  const ExperimentConfig cfg = parse_experiment_config(
      R"({"workload": {"kind": "range"}, "n": 16, "m": 4, "s": [2, 4],
          "epsilons": 1.0, "mechanisms": ["NOD"], "trials": 2,
          "data": {"cardinality": 64}})");
  const std::vector<ErrorReport> rows = run_experiment(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].s == 0);
}

TEST_CASE("counts shorter than the domain fail the whole cell cleanly") {
  TempDir tmp;
  const std::string counts = tmp.file("short.txt");
  write_text(counts, "1\n2\n3\n4\n5\n6\n7\n8\n9\n10\n");
  std::ostringstream config;
  config << R"({"workload": {"kind": "range"}, "n": 32, "m": 4,
                "epsilons": 1.0, "mechanisms": ["NOD", "NOR"], "trials": 3,
                "data": {"file": ")"
         << counts << R"("}})";
  const std::vector<ErrorReport> rows =
      run_experiment(parse_experiment_config(config.str()));

  REQUIRE(rows.size() == 2);
  for (const ErrorReport& r : rows) {
    CHECK(r.error == "count vector shorter than target domain size");
    CHECK(r.trials == 0);
    CHECK_FALSE(r.converged);
    CHECK(r.total_sq_error == 0.0);
  }
}

TEST_CASE("a cell that exceeds its time budget reports partial progress") {
  const ExperimentConfig cfg = parse_experiment_config(
      R"({"workload": {"kind": "range"}, "n": 4096, "m": 64,
          "epsilons": 1.0, "mechanisms": ["NOD"], "trials": 100000,
          "cell_timeout_seconds": 0.05, "master_seed": 1})");
  const std::vector<ErrorReport> rows = run_experiment(cfg);

  REQUIRE(rows.size() == 1);
  const ErrorReport& row = rows[0];
  CHECK(row.error.rfind("cell timeout after", 0) == 0);
  CHECK(row.trials > 0);
  CHECK(row.trials < 100000);
  CHECK_FALSE(row.converged);
  // Completed trials still contribute a mean error.
  CHECK(row.total_sq_error > 0.0);
}

TEST_CASE("CSV output carries the documented header and quoting") {
  std::vector<ErrorReport> rows(1);
  rows[0].workload_kind = "range";
  rows[0].n = 8;
  rows[0].m = 3;
  rows[0].gamma = 0.01;
  rows[0].r_multiplier = 1.2;
  rows[0].epsilon = 0.5;
  rows[0].data_label = "pareto(a=1.2,xm=10,N=65536)";
  rows[0].trials = 7;
  rows[0].mechanism_id = "NOD";
  rows[0].total_sq_error = 12.5;
  rows[0].per_query_sq_error = 12.5 / 3.0;
  rows[0].converged = false;
  rows[0].error = "boom, with a comma and \"quotes\"";

  const std::string text = csv_of(rows);
  std::istringstream lines(text);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "workload,n,m,s,gamma,r_multiplier,epsilon,data,trials,mechanism,"
        "total_sq_error,per_query_sq_error,decompose_time,answer_time,"
        "converged,failure");
  std::string body;
  std::getline(lines, body);
  CHECK(body.find(",0.5,") != std::string::npos);
  CHECK(body.find(",NOD,") != std::string::npos);
  CHECK(body.find(",0,") != std::string::npos);  // converged flag
  CHECK(body.find("\"boom, with a comma and \"\"quotes\"\"\"") !=
        std::string::npos);
}

TEST_CASE("JSON output parses back with every field") {
  std::vector<ErrorReport> rows(2);
  rows[0].workload_kind = "related";
  rows[0].n = 16;
  rows[0].m = 4;
  rows[0].s = 2;
  rows[0].gamma = 0.01;
  rows[0].r_multiplier = 1.5;
  rows[0].epsilon = 0.25;
  rows[0].data_label = "file:/tmp/counts.txt";
  rows[0].trials = 9;
  rows[0].mechanism_id = "LRM";
  rows[0].total_sq_error = 3.75;
  rows[0].per_query_sq_error = 3.75 / 4.0;
  rows[0].decompose_time = 0.5;
  rows[0].answer_time = 0.25;
  rows[0].converged = true;
  rows[1].mechanism_id = "NOD";
  rows[1].error = "went sideways";
  rows[1].converged = false;

  std::ostringstream out;
  emit_json(rows, out);
  const nlohmann::json parsed = nlohmann::json::parse(out.str());

  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0]["workload"] == "related");
  CHECK(parsed[0]["n"] == 16);
  CHECK(parsed[0]["m"] == 4);
  CHECK(parsed[0]["s"] == 2);
  CHECK(parsed[0]["gamma"] == 0.01);
  CHECK(parsed[0]["r_multiplier"] == 1.5);
  CHECK(parsed[0]["epsilon"] == 0.25);
  CHECK(parsed[0]["data"] == "file:/tmp/counts.txt");
  CHECK(parsed[0]["trials"] == 9);
  CHECK(parsed[0]["mechanism"] == "LRM");
  CHECK(parsed[0]["total_sq_error"] == 3.75);
  CHECK(parsed[0]["decompose_time"] == 0.5);
  CHECK(parsed[0]["answer_time"] == 0.25);
  CHECK(parsed[0]["converged"] == true);
  CHECK(parsed[0]["failure"] == "");
  CHECK(parsed[1]["failure"] == "went sideways");
  CHECK(parsed[1]["converged"] == false);
}
