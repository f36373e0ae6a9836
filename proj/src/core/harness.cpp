#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "errors.hpp"
#include "io.hpp"
#include "lrm.hpp"
#include "synopsis.hpp"

namespace dplr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Seed-stream tags. Trial seeds are derive(master, cell_index, trial_index)
// with small cell indices; the tags below keep the workload / data / solver
// streams structurally disjoint from every cell index.
constexpr uint64_t kWorkloadStream = 0x8000000000000001ULL;
constexpr uint64_t kDataStream = 0x8000000000000002ULL;
constexpr uint64_t kSolverStream = 0x8000000000000003ULL;

uint64_t mechanism_ordinal(Mechanism mech) {
  return static_cast<uint64_t>(mech);
}

struct Shape {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index s = 0;  // 0 when the kind has no base-query count
};

struct Group {
  Eigen::Index shape = 0;  // index into the shape list
  double gamma = 0.0;      // relative residual allowance (times ||W||_F)
  double r_multiplier = 0.0;

  Decomposition dec;
  bool has_dec = false;
  std::string dec_error;
  double dec_time = 0.0;

  StrategyMatrix strategy;
  bool has_strategy = false;
  std::string strategy_error;
  double strategy_time = 0.0;
};

struct CellRef {
  Eigen::Index group = 0;
  double epsilon = 0.0;
};

bool wants(const std::vector<Mechanism>& mechs, Mechanism mech) {
  return std::find(mechs.begin(), mechs.end(), mech) != mechs.end();
}

// Runs fn(0..count-1) on `width` workers; fn must not throw.
void run_pool(Eigen::Index width, Eigen::Index count,
              const std::function<void(Eigen::Index)>& fn) {
  width = std::min(width, count);
  if (width <= 1) {
    for (Eigen::Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(width));
  for (Eigen::Index t = 0; t < width; ++t) {
    workers.emplace_back([&]() {
      for (;;) {
        const Eigen::Index i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& w : workers) w.join();
}

double capped_deadline(double own, double cell_timeout) {
  if (cell_timeout <= 0.0) return own;
  if (own < 0.0) return cell_timeout;
  return std::min(own, cell_timeout);
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

[[noreturn]] void config_error(const std::string& what);

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) config_error("trials must be at least 1");
  if (cfg.epsilons.empty()) config_error("epsilons must be non-empty");
  for (double eps : cfg.epsilons) {
    if (!(eps > 0.0)) config_error("every epsilon must be positive");
  }
  if (cfg.mechanisms.empty()) {
    config_error("mechanisms must be non-empty");
  }
  if (!(cfg.unit_sensitivity > 0.0)) {
    config_error("unit_sensitivity must be positive");
  }
  if (cfg.workload.file.empty()) {
    if (!cfg.workload.spec.has_value()) {
      config_error("config needs a workload kind or a workload file");
    }
    if (cfg.n_values.empty() || cfg.m_values.empty()) {
      config_error("n and m grids must be non-empty");
    }
    for (Eigen::Index n : cfg.n_values) {
      if (n < 1) config_error("every n must be at least 1");
    }
    for (Eigen::Index m : cfg.m_values) {
      if (m < 1) config_error("every m must be at least 1");
    }
    for (Eigen::Index s : cfg.s_values) {
      if (s < 1) config_error("every s must be at least 1");
    }
  }
  if (cfg.gamma_values.empty() || cfg.r_multipliers.empty()) {
    config_error("gamma and r_multiplier grids must be non-empty");
  }
  for (double g : cfg.gamma_values) {
    if (!(g >= 0.0)) config_error("every gamma must be >= 0");
  }
  for (double r : cfg.r_multipliers) {
    if (!(r > 0.0)) config_error("every r_multiplier must be > 0");
  }
  if (cfg.threads < 0) config_error("threads must be >= 0");
  if (cfg.data.source == DataSourceSpec::Source::Synthetic) {
    if (cfg.data.cardinality < 1) {
      config_error("data cardinality must be at least 1");
    }
    if (!(cfg.data.pareto_alpha > 0.0) || !(cfg.data.pareto_xm > 0.0)) {
      config_error("power-law data parameters must be positive");
    }
  } else if (cfg.data.path.empty()) {
    config_error("file data source needs a path");
  }
}

}  // namespace

const char* mechanism_name(Mechanism mech) {
  switch (mech) {
    case Mechanism::LRM:
      return "LRM";
    case Mechanism::NOD:
      return "NOD";
    case Mechanism::NOR:
      return "NOR";
    case Mechanism::MM:
      return "MM";
    case Mechanism::WM:
      return "WM";
    case Mechanism::HM:
      return "HM";
  }
  return "unknown";
}

Mechanism mechanism_from_name(const std::string& name) {
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "LRM") return Mechanism::LRM;
  if (upper == "NOD") return Mechanism::NOD;
  if (upper == "NOR") return Mechanism::NOR;
  if (upper == "MM") return Mechanism::MM;
  if (upper == "WM") return Mechanism::WM;
  if (upper == "HM") return Mechanism::HM;
  throw InvalidArgument("unknown mechanism: " + name);
}

std::string DataSourceSpec::label() const {
  if (source == Source::File) return "file:" + path;
  std::ostringstream out;
  out << "pareto(a=" << pareto_alpha << ",xm=" << pareto_xm << ",N="
      << cardinality << ")";
  return out.str();
}

Eigen::Index effective_threads(Eigen::Index requested) {
  Eigen::Index hw = static_cast<Eigen::Index>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  Eigen::Index width = requested > 0 ? requested : hw;
  if (const char* env = std::getenv("DP_LOWRANK_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) {
      width = std::min<Eigen::Index>(width, static_cast<Eigen::Index>(cap));
    }
  }
  return std::max<Eigen::Index>(1, width);
}

std::vector<ErrorReport> run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);

  // --- Workload shapes -----------------------------------------------------
  std::vector<Shape> shapes;
  std::vector<WorkloadMatrix> shape_w;
  const bool from_file = !cfg.workload.file.empty();
  if (from_file) {
    WorkloadMatrix w = load_workload(cfg.workload.file);
    Eigen::Index s = 0;
    if (w.spec && w.spec->kind == WorkloadKind::Related) s = w.spec->s;
    shapes.push_back({w.n(), w.m(), s});
    shape_w.push_back(std::move(w));
  } else {
    const WorkloadSpec& base = *cfg.workload.spec;
    const bool related = base.kind == WorkloadKind::Related;
    for (Eigen::Index n : cfg.n_values) {
      for (Eigen::Index m : cfg.m_values) {
        std::vector<Eigen::Index> s_grid;
        if (!related) {
          s_grid = {0};
        } else if (cfg.s_values.empty()) {
          s_grid = {std::max<Eigen::Index>(1, std::min(m, n) / 2)};
        } else {
          s_grid = cfg.s_values;
        }
        for (Eigen::Index s : s_grid) shapes.push_back({n, m, s});
      }
    }
    shape_w.reserve(shapes.size());
    for (size_t i = 0; i < shapes.size(); ++i) {
      WorkloadSpec spec = base;
      spec.n = shapes[i].n;
      spec.m = shapes[i].m;
      spec.s = shapes[i].s;
      spec.seed = derive_seed(cfg.master_seed, kWorkloadStream, i);
      shape_w.push_back(generate_workload(spec));
    }
  }

  std::vector<SpectrumSummary> shape_spectrum(shapes.size());
  std::vector<double> shape_norm(shapes.size());
  for (size_t i = 0; i < shapes.size(); ++i) {
    shape_spectrum[i] = spectrum(shape_w[i]);
    shape_norm[i] = shape_w[i].entries.norm();
  }

  // --- Counts, coarsened once per distinct n -------------------------------
  Eigen::VectorXd raw;
  if (cfg.data.source == DataSourceSpec::Source::File) {
    raw = load_counts(cfg.data.path, cfg.data.strict_negative_counts);
  } else {
    raw = synthetic_counts(cfg.data.cardinality,
                           derive_seed(cfg.master_seed, kDataStream),
                           cfg.data.pareto_alpha, cfg.data.pareto_xm);
  }
  std::map<Eigen::Index, Eigen::VectorXd> counts_by_n;
  std::map<Eigen::Index, std::string> counts_error_by_n;
  for (const Shape& shape : shapes) {
    if (counts_by_n.count(shape.n) || counts_error_by_n.count(shape.n)) continue;
    try {
      counts_by_n[shape.n] = coarsen(raw, shape.n);
    } catch (const std::exception& e) {
      counts_error_by_n[shape.n] = e.what();
    }
  }
  std::vector<Eigen::VectorXd> shape_exact(shapes.size());
  for (size_t i = 0; i < shapes.size(); ++i) {
    auto it = counts_by_n.find(shapes[i].n);
    if (it != counts_by_n.end()) {
      shape_exact[i] = shape_w[i].entries * it->second;
    }
  }

  // --- Grid cells ----------------------------------------------------------
  std::vector<Group> groups;
  for (size_t sh = 0; sh < shapes.size(); ++sh) {
    for (double gamma : cfg.gamma_values) {
      for (double rm : cfg.r_multipliers) {
        Group g;
        g.shape = static_cast<Eigen::Index>(sh);
        g.gamma = gamma;
        g.r_multiplier = rm;
        groups.push_back(std::move(g));
      }
    }
  }
  std::vector<CellRef> cells;
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    for (double eps : cfg.epsilons) {
      cells.push_back({static_cast<Eigen::Index>(gi), eps});
    }
  }

  const Eigen::Index width = effective_threads(cfg.threads);
  const bool needs_lrm = wants(cfg.mechanisms, Mechanism::LRM);
  const bool needs_mm = wants(cfg.mechanisms, Mechanism::MM);

  // Phase 1: per-group precomputation, shared across the epsilon sweep.
  run_pool(width, static_cast<Eigen::Index>(groups.size()),
           [&](Eigen::Index gi) {
             Group& g = groups[static_cast<size_t>(gi)];
             const WorkloadMatrix& w = shape_w[static_cast<size_t>(g.shape)];
             if (needs_lrm) {
               SolverConfig sc = cfg.solver;
               sc.gamma = g.gamma * shape_norm[static_cast<size_t>(g.shape)];
               const Eigen::Index rank =
                   shape_spectrum[static_cast<size_t>(g.shape)].rank;
               sc.r = std::max<Eigen::Index>(
                   1, static_cast<Eigen::Index>(
                          std::llround(g.r_multiplier * static_cast<double>(rank))));
               sc.seed = derive_seed(cfg.master_seed, kSolverStream,
                                     static_cast<uint64_t>(gi));
               sc.deadline_seconds =
                   capped_deadline(sc.deadline_seconds, cfg.cell_timeout_seconds);
               const auto t0 = Clock::now();
               try {
                 g.dec = decompose(w, sc);
                 g.has_dec = true;
               } catch (const std::exception& e) {
                 g.dec_error = e.what();
               }
               g.dec_time = seconds_since(t0);
             }
             if (needs_mm) {
               MmConfig mc = cfg.mm;
               mc.deadline_seconds =
                   capped_deadline(mc.deadline_seconds, cfg.cell_timeout_seconds);
               const auto t0 = Clock::now();
               try {
                 g.strategy = mm_solve_strategy(w, mc);
                 g.has_strategy = true;
               } catch (const std::exception& e) {
                 g.strategy_error = e.what();
               }
               g.strategy_time = seconds_since(t0);
             }
           });

  // Phase 2: one row per (cell, mechanism); each cell runs sequentially.
  const size_t mech_count = cfg.mechanisms.size();
  std::vector<ErrorReport> reports(cells.size() * mech_count);
  const std::string data_label = cfg.data.label();

  run_pool(width, static_cast<Eigen::Index>(cells.size()),
           [&](Eigen::Index ci) {
             const CellRef& cell = cells[static_cast<size_t>(ci)];
             const Group& g = groups[static_cast<size_t>(cell.group)];
             const Shape& shape = shapes[static_cast<size_t>(g.shape)];
             const WorkloadMatrix& w = shape_w[static_cast<size_t>(g.shape)];
             const auto counts_it = counts_by_n.find(shape.n);
             const auto cell_start = Clock::now();
             const PrivacyParams p{cell.epsilon, cfg.unit_sensitivity};

             for (size_t mp = 0; mp < mech_count; ++mp) {
               const Mechanism mech = cfg.mechanisms[mp];
               ErrorReport& row =
                   reports[static_cast<size_t>(ci) * mech_count + mp];
               row.workload_kind = w.name;
               row.n = shape.n;
               row.m = shape.m;
               row.s = shape.s;
               row.gamma = g.gamma;
               row.r_multiplier = g.r_multiplier;
               row.epsilon = cell.epsilon;
               row.data_label = data_label;
               row.trials = cfg.trials;
               row.mechanism_id = mechanism_name(mech);

               if (counts_it == counts_by_n.end()) {
                 row.error = counts_error_by_n.at(shape.n);
                 row.converged = false;
                 row.trials = 0;
                 continue;
               }
               if (mech == Mechanism::LRM) {
                 if (!g.has_dec) {
                   row.error = g.dec_error;
                   row.converged = false;
                   row.trials = 0;
                   continue;
                 }
                 row.decompose_time = g.dec_time;
                 row.converged = g.dec.converged;
               } else if (mech == Mechanism::MM) {
                 if (!g.has_strategy) {
                   row.error = g.strategy_error;
                   row.converged = false;
                   row.trials = 0;
                   continue;
                 }
                 row.decompose_time = g.strategy_time;
                 row.converged = g.strategy.converged;
               }

               const Eigen::VectorXd& counts = counts_it->second;
               const Eigen::VectorXd& exact =
                   shape_exact[static_cast<size_t>(g.shape)];
               double total = 0.0;
               Eigen::Index completed = 0;
               std::string failure;
               const auto answer_start = Clock::now();
               try {
                 for (Eigen::Index trial = 0; trial < cfg.trials; ++trial) {
                   if (cfg.cell_timeout_seconds > 0.0 &&
                       seconds_since(cell_start) > cfg.cell_timeout_seconds) {
                     std::ostringstream msg;
                     msg << "cell timeout after " << completed << " of "
                         << cfg.trials << " trials";
                     failure = msg.str();
                     break;
                   }
                   const uint64_t trial_seed =
                       derive_seed(cfg.master_seed, static_cast<uint64_t>(ci),
                                   static_cast<uint64_t>(trial));
                   const uint64_t stream =
                       derive_seed(trial_seed, mechanism_ordinal(mech));
                   Rng rng(stream);
                   NoisyAnswer ans;
                   switch (mech) {
                     case Mechanism::LRM:
                       ans = lrm_answer(g.dec, counts, p, rng, stream);
                       break;
                     case Mechanism::NOD:
                       ans = noise_on_data(w, counts, p, rng, stream);
                       break;
                     case Mechanism::NOR:
                       ans = noise_on_results(w, counts, p, rng, stream);
                       break;
                     case Mechanism::MM:
                       ans = mm_answer(g.strategy, w, counts, p, rng, stream);
                       break;
                     case Mechanism::WM:
                       ans = wavelet_answer(w, counts, p, rng, stream);
                       break;
                     case Mechanism::HM:
                       ans = hierarchical_answer(w, counts, p, rng, stream);
                       break;
                   }
                   total += (ans.values - exact).squaredNorm();
                   ++completed;
                 }
               } catch (const std::exception& e) {
                 failure = e.what();
               }
               row.answer_time = seconds_since(answer_start);
               row.trials = completed;
               if (completed > 0) {
                 row.total_sq_error = total / static_cast<double>(completed);
                 row.per_query_sq_error =
                     row.total_sq_error / static_cast<double>(shape.m);
               }
               if (!failure.empty()) {
                 row.error = failure;
                 row.converged = false;
               }
             }
           });

  if (!cfg.report_timings) {
    for (ErrorReport& row : reports) {
      row.decompose_time = 0.0;
      row.answer_time = 0.0;
    }
  }
  return reports;
}

void emit_csv(const std::vector<ErrorReport>& reports, std::ostream& out) {
  out << "workload,n,m,s,gamma,r_multiplier,epsilon,data,trials,mechanism,"
         "total_sq_error,per_query_sq_error,decompose_time,answer_time,"
         "converged,failure\n";
  for (const ErrorReport& r : reports) {
    out << csv_field(r.workload_kind) << ',' << r.n << ',' << r.m << ',' << r.s
        << ',' << format_double(r.gamma) << ',' << format_double(r.r_multiplier)
        << ',' << format_double(r.epsilon) << ',' << csv_field(r.data_label)
        << ',' << r.trials << ',' << csv_field(r.mechanism_id) << ','
        << format_double(r.total_sq_error) << ','
        << format_double(r.per_query_sq_error) << ','
        << format_double(r.decompose_time) << ','
        << format_double(r.answer_time) << ',' << (r.converged ? 1 : 0) << ','
        << csv_field(r.error) << '\n';
  }
}

void emit_json(const std::vector<ErrorReport>& reports, std::ostream& out) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ErrorReport& r : reports) {
    nlohmann::json row;
    row["workload"] = r.workload_kind;
    row["n"] = r.n;
    row["m"] = r.m;
    row["s"] = r.s;
    row["gamma"] = r.gamma;
    row["r_multiplier"] = r.r_multiplier;
    row["epsilon"] = r.epsilon;
    row["data"] = r.data_label;
    row["trials"] = r.trials;
    row["mechanism"] = r.mechanism_id;
    row["total_sq_error"] = r.total_sq_error;
    row["per_query_sq_error"] = r.per_query_sq_error;
    row["decompose_time"] = r.decompose_time;
    row["answer_time"] = r.answer_time;
    row["converged"] = r.converged;
    row["failure"] = r.error;
    rows.push_back(std::move(row));
  }
  out << rows.dump(2) << '\n';
}

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) {
  throw InvalidArgument("experiment config: " + what);
}

void check_keys(const json& obj, const char* where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      config_error(std::string("unknown key \"") + it.key() + "\" in " + where);
    }
  }
}

std::vector<double> number_list(const json& value, const char* key) {
  std::vector<double> out;
  if (value.is_number()) {
    out.push_back(value.get<double>());
  } else if (value.is_array()) {
    for (const json& item : value) {
      if (!item.is_number()) {
        config_error(std::string(key) + " entries must be numbers");
      }
      out.push_back(item.get<double>());
    }
  } else {
    config_error(std::string(key) + " must be a number or an array of numbers");
  }
  if (out.empty()) config_error(std::string(key) + " must be non-empty");
  return out;
}

std::vector<Eigen::Index> index_list(const json& value, const char* key) {
  std::vector<Eigen::Index> out;
  for (double v : number_list(value, key)) {
    if (v != std::floor(v)) {
      config_error(std::string(key) + " entries must be integers");
    }
    out.push_back(static_cast<Eigen::Index>(v));
  }
  return out;
}

double number_or(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) config_error(std::string(key) + " must be a number");
  return obj[key].get<double>();
}

Eigen::Index integer_or(const json& obj, const char* key, Eigen::Index fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    config_error(std::string(key) + " must be an integer");
  }
  return obj[key].get<Eigen::Index>();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(e.what());
  }
  if (!root.is_object()) config_error("top level must be a JSON object");
  check_keys(root, "the top level",
             {"workload", "data", "mechanisms", "epsilons", "trials", "n", "m",
              "s", "gamma", "r_multiplier", "unit_sensitivity", "master_seed",
              "threads", "cell_timeout_seconds", "report_timings", "solver",
              "mm"});

  ExperimentConfig cfg;

  if (!root.contains("workload") || !root["workload"].is_object()) {
    config_error("\"workload\" object is required");
  }
  const json& wl = root["workload"];
  if (wl.contains("file")) {
    check_keys(wl, "workload", {"file"});
    cfg.workload.file = wl["file"].get<std::string>();
    if (cfg.workload.file.empty()) config_error("workload file path is empty");
  } else {
    check_keys(wl, "workload", {"kind", "p"});
    if (!wl.contains("kind") || !wl["kind"].is_string()) {
      config_error("workload needs a \"kind\" string or a \"file\" path");
    }
    WorkloadSpec spec;
    spec.kind = workload_kind_from_name(wl["kind"].get<std::string>());
    spec.p = number_or(wl, "p", spec.p);
    cfg.workload.spec = spec;
  }

  if (root.contains("data")) {
    const json& data = root["data"];
    if (!data.is_object()) config_error("\"data\" must be an object");
    if (data.contains("file")) {
      check_keys(data, "data", {"file", "strict"});
      cfg.data.source = DataSourceSpec::Source::File;
      cfg.data.path = data["file"].get<std::string>();
      if (data.contains("strict")) {
        if (!data["strict"].is_boolean()) config_error("strict must be a bool");
        cfg.data.strict_negative_counts = data["strict"].get<bool>();
      }
    } else {
      check_keys(data, "data", {"cardinality", "pareto_alpha", "pareto_xm"});
      cfg.data.cardinality =
          integer_or(data, "cardinality", cfg.data.cardinality);
      cfg.data.pareto_alpha =
          number_or(data, "pareto_alpha", cfg.data.pareto_alpha);
      cfg.data.pareto_xm = number_or(data, "pareto_xm", cfg.data.pareto_xm);
    }
  }

  if (root.contains("mechanisms")) {
    if (!root["mechanisms"].is_array()) {
      config_error("\"mechanisms\" must be an array of names");
    }
    cfg.mechanisms.clear();
    for (const json& item : root["mechanisms"]) {
      if (!item.is_string()) config_error("mechanism names must be strings");
      cfg.mechanisms.push_back(mechanism_from_name(item.get<std::string>()));
    }
  }

  if (root.contains("epsilons")) {
    cfg.epsilons = number_list(root["epsilons"], "epsilons");
  }
  cfg.trials = integer_or(root, "trials", cfg.trials);
  if (root.contains("n")) cfg.n_values = index_list(root["n"], "n");
  if (root.contains("m")) cfg.m_values = index_list(root["m"], "m");
  if (root.contains("s")) cfg.s_values = index_list(root["s"], "s");
  if (root.contains("gamma")) {
    cfg.gamma_values = number_list(root["gamma"], "gamma");
  }
  if (root.contains("r_multiplier")) {
    cfg.r_multipliers = number_list(root["r_multiplier"], "r_multiplier");
  }
  cfg.unit_sensitivity =
      number_or(root, "unit_sensitivity", cfg.unit_sensitivity);
  if (root.contains("master_seed")) {
    if (!root["master_seed"].is_number_integer() &&
        !root["master_seed"].is_number_unsigned()) {
      config_error("master_seed must be an integer");
    }
    cfg.master_seed = root["master_seed"].get<uint64_t>();
  }
  cfg.threads = integer_or(root, "threads", cfg.threads);
  cfg.cell_timeout_seconds =
      number_or(root, "cell_timeout_seconds", cfg.cell_timeout_seconds);
  if (root.contains("report_timings")) {
    if (!root["report_timings"].is_boolean()) {
      config_error("report_timings must be a bool");
    }
    cfg.report_timings = root["report_timings"].get<bool>();
  }

  if (root.contains("solver")) {
    const json& sv = root["solver"];
    if (!sv.is_object()) config_error("\"solver\" must be an object");
    check_keys(sv, "solver",
               {"beta0", "beta_max", "beta_double_every", "outer_max",
                "inner_max", "inner_rel_tol", "nesterov_max", "residual_tol"});
    cfg.solver.beta0 = number_or(sv, "beta0", cfg.solver.beta0);
    cfg.solver.beta_max = number_or(sv, "beta_max", cfg.solver.beta_max);
    cfg.solver.beta_double_every =
        integer_or(sv, "beta_double_every", cfg.solver.beta_double_every);
    cfg.solver.outer_max = integer_or(sv, "outer_max", cfg.solver.outer_max);
    cfg.solver.inner_max = integer_or(sv, "inner_max", cfg.solver.inner_max);
    cfg.solver.inner_rel_tol =
        number_or(sv, "inner_rel_tol", cfg.solver.inner_rel_tol);
    cfg.solver.nesterov_max =
        integer_or(sv, "nesterov_max", cfg.solver.nesterov_max);
    cfg.solver.residual_tol =
        number_or(sv, "residual_tol", cfg.solver.residual_tol);
  }

  if (root.contains("mm")) {
    const json& mm = root["mm"];
    if (!mm.is_object()) config_error("\"mm\" must be an object");
    check_keys(mm, "mm",
               {"smoothing_tolerance", "max_iters", "window",
                "eig_floor_factor", "armijo", "grad_tol"});
    cfg.mm.smoothing_tolerance =
        number_or(mm, "smoothing_tolerance", cfg.mm.smoothing_tolerance);
    cfg.mm.max_iters = integer_or(mm, "max_iters", cfg.mm.max_iters);
    cfg.mm.window = integer_or(mm, "window", cfg.mm.window);
    cfg.mm.eig_floor_factor =
        number_or(mm, "eig_floor_factor", cfg.mm.eig_floor_factor);
    cfg.mm.armijo = number_or(mm, "armijo", cfg.mm.armijo);
    cfg.mm.grad_tol = number_or(mm, "grad_tol", cfg.mm.grad_tol);
  }

  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open experiment config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

}  // namespace dplr
