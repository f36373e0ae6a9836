// Command-line front end for the dplowrank shared library.
//
// Subcommands: generate-workload, decompose, run, bounds. Exit codes:
// 0 success, 1 input error, 2 some experiment cells failed, 3 internal
// error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dplowrank.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitCellFailures = 2;
constexpr int kExitInternal = 3;

int exit_for(dplr_status status) {
  switch (status) {
    case DPLR_OK:
      return kExitOk;
    case DPLR_ERR_INVALID_ARGUMENT:
    case DPLR_ERR_IO:
    case DPLR_ERR_DOMAIN:
      return kExitInput;
    case DPLR_ERR_INTERNAL:
      return kExitInternal;
  }
  return kExitInternal;
}

int report_failure(dplr_status status) {
  std::cerr << "error: " << dplr_last_error() << "\n";
  return exit_for(status);
}

struct WorkloadHandle {
  dplr_workload* ptr = nullptr;
  ~WorkloadHandle() { dplr_workload_free(ptr); }
};

struct DecompositionHandle {
  dplr_decomposition* ptr = nullptr;
  ~DecompositionHandle() { dplr_decomposition_free(ptr); }
};

struct GenerateArgs {
  std::string kind;
  int64_t m = 256;
  int64_t n = 1024;
  double p = 0.02;
  int64_t s = 0;  // 0: half of min(m, n) for the related kind
  uint64_t seed = 0;
  std::string out;
};

int cmd_generate(const GenerateArgs& args) {
  int64_t s = args.s;
  if (args.kind == "related" && s == 0) {
    s = std::max<int64_t>(1, std::min(args.m, args.n) / 2);
  }
  WorkloadHandle w;
  dplr_status status = dplr_workload_generate(args.kind.c_str(), args.m,
                                              args.n, args.p, s, args.seed,
                                              &w.ptr);
  if (status != DPLR_OK) return report_failure(status);
  status = dplr_workload_save(w.ptr, args.out.c_str());
  if (status != DPLR_OK) return report_failure(status);
  std::cout << "wrote " << args.out << ".csv and " << args.out
            << ".meta.json (" << args.m << " x " << args.n << " " << args.kind
            << ")\n";
  return kExitOk;
}

struct DecomposeArgs {
  std::string workload;
  std::string out;
  dplr_solver_config cfg;
  bool r_given = false;
};

int cmd_decompose(const DecomposeArgs& args) {
  if (args.r_given && args.cfg.r <= 0) {
    std::cerr << "error: --r must be at least 1\n";
    return kExitInput;
  }
  WorkloadHandle w;
  dplr_status status = dplr_workload_load(args.workload.c_str(), &w.ptr);
  if (status != DPLR_OK) return report_failure(status);

  DecompositionHandle dec;
  status = dplr_decompose(w.ptr, &args.cfg, &dec.ptr);
  if (status != DPLR_OK) return report_failure(status);

  dplr_decomposition_info info;
  status = dplr_decomposition_get_info(dec.ptr, &info);
  if (status != DPLR_OK) return report_failure(status);

  status = dplr_decomposition_save(dec.ptr, args.out.c_str());
  if (status != DPLR_OK) return report_failure(status);

  std::cout << "factorization " << info.m << " x " << info.r << " times "
            << info.r << " x " << info.n << " written to " << args.out << "\n"
            << "  residual:            " << info.residual << " (allowance "
            << info.gamma << ")\n"
            << "  objective:           " << info.objective << "\n"
            << "  column sensitivity:  " << info.l_sensitivity << "\n"
            << "  iterations:          " << info.iterations << "\n"
            << "  converged:           " << (info.converged ? "yes" : "no")
            << "\n";
  if (!info.converged) {
    std::cerr << "warning: solver did not reach the residual allowance; the "
                 "minimum-residual iterate was saved\n";
  }
  return kExitOk;
}

struct BoundsArgs {
  std::string workload;
  double epsilon = 1.0;
  double unit = 1.0;
};

int cmd_bounds(const BoundsArgs& args) {
  WorkloadHandle w;
  dplr_status status = dplr_workload_load(args.workload.c_str(), &w.ptr);
  if (status != DPLR_OK) return report_failure(status);

  int64_t m = 0;
  int64_t n = 0;
  dplr_workload_dims(w.ptr, &m, &n);

  double sens = 0.0;
  status = dplr_workload_sensitivity(w.ptr, &sens);
  if (status != DPLR_OK) return report_failure(status);

  dplr_error_bounds bounds;
  status =
      dplr_error_bounds_compute(w.ptr, args.epsilon, args.unit, &bounds);
  if (status != DPLR_OK) return report_failure(status);

  double nod = 0.0;
  double nor = 0.0;
  status = dplr_expected_error_nod(w.ptr, args.epsilon, args.unit, &nod);
  if (status != DPLR_OK) return report_failure(status);
  status = dplr_expected_error_nor(w.ptr, args.epsilon, args.unit, &nor);
  if (status != DPLR_OK) return report_failure(status);

  std::cout << "workload:             " << args.workload << " (" << m << " x "
            << n << ")\n"
            << "epsilon:              " << args.epsilon << "\n"
            << "rank:                 " << bounds.rank << "\n"
            << "condition ratio:      " << bounds.condition_ratio << "\n"
            << "sensitivity:          " << sens << "\n"
            << "optimum upper bound:  " << bounds.upper
            << "  (multiply by 2 for the noise-variance convention)\n"
            << "optimum lower bound:  " << bounds.lower
            << "  (order-of-magnitude only)\n"
            << "approximation ratio:  " << bounds.approx_ratio
            << (bounds.ratio_in_regime ? ""
                                       : "  (outside stated regime: rank <= 5)")
            << "\n"
            << "noise-on-data:        " << nod
            << "  (expected total squared error)\n"
            << "noise-on-results:     " << nor
            << "  (expected total squared error)\n";
  return kExitOk;
}

struct RunArgs {
  std::string config;
  std::string out_csv;
  std::string out_json;
  int64_t trials = 0;
  bool trials_given = false;
  uint64_t master_seed = 0;
  bool master_seed_given = false;
  int64_t threads = 0;
  bool threads_given = false;
  double timeout = 0.0;
  bool timeout_given = false;
  bool timings = true;
  bool timings_given = false;
};

int cmd_run(const RunArgs& args) {
  std::ifstream in(args.config);
  if (!in) {
    std::cerr << "error: cannot open experiment config: " << args.config
              << "\n";
    return kExitInput;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();

  nlohmann::json config;
  try {
    config = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: experiment config: " << e.what() << "\n";
    return kExitInput;
  }
  if (!config.is_object()) {
    std::cerr << "error: experiment config: top level must be a JSON object\n";
    return kExitInput;
  }
  if (args.trials_given) config["trials"] = args.trials;
  if (args.master_seed_given) config["master_seed"] = args.master_seed;
  if (args.threads_given) config["threads"] = args.threads;
  if (args.timeout_given) config["cell_timeout_seconds"] = args.timeout;
  if (args.timings_given) config["report_timings"] = args.timings;

  int64_t failed = 0;
  const dplr_status status = dplr_run_experiment_text(
      config.dump().c_str(), args.out_csv.c_str(),
      args.out_json.empty() ? nullptr : args.out_json.c_str(), &failed);
  if (status != DPLR_OK) return report_failure(status);

  std::cout << "report written to " << args.out_csv;
  if (!args.out_json.empty()) std::cout << " and " << args.out_json;
  std::cout << "\n";
  if (failed > 0) {
    std::cerr << "warning: " << failed
              << " report row(s) recorded a failure; see the failure column\n";
    return kExitCellFailures;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Differentially private batches of linear counting queries: low-rank "
      "factorization mechanism, baselines, error bounds, and a benchmark "
      "harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dplr_version());

  GenerateArgs gen_args;
  CLI::App* gen = app.add_subcommand(
      "generate-workload", "Generate a synthetic workload (CSV + metadata)");
  gen->add_option("--kind", gen_args.kind, "discrete | range | related")
      ->required();
  gen->add_option("--m", gen_args.m, "number of queries");
  gen->add_option("--n", gen_args.n, "domain size");
  gen->add_option("--p", gen_args.p,
                  "probability of a +1 entry (discrete kind)");
  gen->add_option("--s", gen_args.s,
                  "base queries (related kind); 0 selects min(m,n)/2");
  gen->add_option("--seed", gen_args.seed, "generator seed");
  gen->add_option("--out", gen_args.out, "output prefix")->required();

  DecomposeArgs dec_args;
  dplr_solver_config_init(&dec_args.cfg);
  CLI::App* dec = app.add_subcommand(
      "decompose", "Factor a workload into B * L for the low-rank mechanism");
  dec->add_option("workload", dec_args.workload, "workload CSV path")
      ->required();
  dec->add_option("--out", dec_args.out, "output directory")->required();
  CLI::Option* r_opt =
      dec->add_option("--r", dec_args.cfg.r, "factor width (default: auto)");
  dec->add_option("--gamma", dec_args.cfg.gamma,
                  "residual allowance ||W - BL||_F (0 = exact)");
  dec->add_option("--beta0", dec_args.cfg.beta0, "initial penalty weight");
  dec->add_option("--beta-max", dec_args.cfg.beta_max, "penalty ceiling");
  dec->add_option("--beta-double-every", dec_args.cfg.beta_double_every,
                  "outer iterations between penalty doublings");
  dec->add_option("--outer-max", dec_args.cfg.outer_max,
                  "outer iteration cap");
  dec->add_option("--inner-max", dec_args.cfg.inner_max,
                  "alternations per outer iteration");
  dec->add_option("--inner-rel-tol", dec_args.cfg.inner_rel_tol,
                  "relative objective change ending the alternation");
  dec->add_option("--nesterov-max", dec_args.cfg.nesterov_max,
                  "projected-gradient steps per L solve");
  dec->add_option("--residual-tol", dec_args.cfg.residual_tol,
                  "convergence residual (default: the allowance)");
  dec->add_option("--deadline", dec_args.cfg.deadline_seconds,
                  "wall-clock budget in seconds (negative: none)");
  dec->add_option("--seed", dec_args.cfg.seed, "solver seed");

  RunArgs run_args;
  CLI::App* run =
      app.add_subcommand("run", "Run an experiment grid from a JSON config");
  run->add_option("--config", run_args.config, "JSON config path")->required();
  run->add_option("--out", run_args.out_csv, "CSV report path")->required();
  run->add_option("--json", run_args.out_json, "JSON report path (optional)");
  CLI::Option* trials_opt =
      run->add_option("--trials", run_args.trials, "override trials");
  CLI::Option* seed_opt = run->add_option("--master-seed",
                                          run_args.master_seed,
                                          "override master seed");
  CLI::Option* threads_opt =
      run->add_option("--threads", run_args.threads, "override worker count");
  CLI::Option* timeout_opt = run->add_option(
      "--timeout", run_args.timeout, "override per-cell seconds");
  CLI::Option* timings_opt = run->add_flag(
      "--timings,!--no-timings", run_args.timings,
      "include wall times in the report (--no-timings zeroes them)");

  BoundsArgs bounds_args;
  CLI::App* bounds = app.add_subcommand(
      "bounds", "Print analytic error bounds for a workload");
  bounds->add_option("workload", bounds_args.workload, "workload CSV path")
      ->required();
  bounds->add_option("--epsilon", bounds_args.epsilon, "privacy budget");
  bounds->add_option("--unit", bounds_args.unit,
                     "per-record sensitivity of a unit count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*gen) return cmd_generate(gen_args);
    if (*dec) {
      dec_args.r_given = r_opt->count() > 0;
      return cmd_decompose(dec_args);
    }
    if (*run) {
      run_args.trials_given = trials_opt->count() > 0;
      run_args.master_seed_given = seed_opt->count() > 0;
      run_args.threads_given = threads_opt->count() > 0;
      run_args.timeout_given = timeout_opt->count() > 0;
      run_args.timings_given = timings_opt->count() > 0;
      return cmd_run(run_args);
    }
    if (*bounds) return cmd_bounds(bounds_args);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
