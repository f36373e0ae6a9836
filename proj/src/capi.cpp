#include "dplowrank.h"

#include <Eigen/Dense>
#include <algorithm>
#include <fstream>
#include <string>
#include <utility>

#include "core/decomposition.hpp"
#include "core/errors.hpp"
#include "core/harness.hpp"
#include "core/io.hpp"
#include "core/lrm.hpp"
#include "core/mechanisms.hpp"
#include "core/rng.hpp"
#include "core/workload.hpp"

struct dplr_workload {
  dplr::WorkloadMatrix w;
};

struct dplr_decomposition {
  dplr::Decomposition d;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
dplr_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return DPLR_OK;
  } catch (const dplr::InvalidArgument& e) {
    g_last_error = e.what();
    return DPLR_ERR_INVALID_ARGUMENT;
  } catch (const dplr::IoError& e) {
    g_last_error = e.what();
    return DPLR_ERR_IO;
  } catch (const dplr::DomainError& e) {
    g_last_error = e.what();
    return DPLR_ERR_DOMAIN;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DPLR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return DPLR_ERR_INTERNAL;
  }
}

dplr_status fail_null(const char* what) {
  g_last_error = std::string(what) + " must not be NULL";
  return DPLR_ERR_INVALID_ARGUMENT;
}

void copy_row_major(const Eigen::MatrixXd& src, double* out) {
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>>(out, src.rows(), src.cols()) = src;
}

}  // namespace

extern "C" {

const char* dplr_last_error(void) { return g_last_error.c_str(); }

const char* dplr_version(void) { return "1.0.0"; }

dplr_status dplr_workload_generate(const char* kind, int64_t m, int64_t n,
                                   double p, int64_t s, uint64_t seed,
                                   dplr_workload** out) {
  if (!kind) return fail_null("kind");
  if (!out) return fail_null("out");
  return guarded([&]() {
    dplr::WorkloadSpec spec;
    spec.kind = dplr::workload_kind_from_name(kind);
    spec.m = static_cast<Eigen::Index>(m);
    spec.n = static_cast<Eigen::Index>(n);
    spec.p = p;
    spec.s = static_cast<Eigen::Index>(s);
    spec.seed = seed;
    *out = new dplr_workload{dplr::generate_workload(spec)};
  });
}

dplr_status dplr_workload_from_data(const double* entries, int64_t m,
                                    int64_t n, dplr_workload** out) {
  if (!entries) return fail_null("entries");
  if (!out) return fail_null("out");
  if (m < 1 || n < 1) {
    g_last_error = "workload dimensions must be at least 1";
    return DPLR_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    Eigen::MatrixXd w =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>(
            entries, static_cast<Eigen::Index>(m),
            static_cast<Eigen::Index>(n));
    if (!w.allFinite()) {
      throw dplr::InvalidArgument("workload matrix has non-finite entries");
    }
    *out = new dplr_workload{dplr::WorkloadMatrix{std::move(w), "custom", {}}};
  });
}

dplr_status dplr_workload_load(const char* path, dplr_workload** out) {
  if (!path) return fail_null("path");
  if (!out) return fail_null("out");
  return guarded([&]() { *out = new dplr_workload{dplr::load_workload(path)}; });
}

dplr_status dplr_workload_save(const dplr_workload* w, const char* prefix) {
  if (!w) return fail_null("workload");
  if (!prefix) return fail_null("prefix");
  return guarded([&]() { dplr::save_workload(w->w, prefix); });
}

dplr_status dplr_workload_dims(const dplr_workload* w, int64_t* m, int64_t* n) {
  if (!w) return fail_null("workload");
  return guarded([&]() {
    if (m) *m = static_cast<int64_t>(w->w.m());
    if (n) *n = static_cast<int64_t>(w->w.n());
  });
}

dplr_status dplr_workload_entries(const dplr_workload* w, double* out) {
  if (!w) return fail_null("workload");
  if (!out) return fail_null("out");
  return guarded([&]() { copy_row_major(w->w.entries, out); });
}

dplr_status dplr_workload_sensitivity(const dplr_workload* w, double* out) {
  if (!w) return fail_null("workload");
  if (!out) return fail_null("out");
  return guarded([&]() { *out = dplr::sensitivity(w->w.entries); });
}

dplr_status dplr_workload_spectrum(const dplr_workload* w, double* values,
                                   int64_t capacity, int64_t* count,
                                   int64_t* rank, double* condition_ratio) {
  if (!w) return fail_null("workload");
  if (capacity > 0 && !values) return fail_null("values");
  return guarded([&]() {
    const dplr::SpectrumSummary summary = dplr::spectrum(w->w);
    const int64_t total = static_cast<int64_t>(summary.singular_values.size());
    const int64_t to_copy = std::min(capacity, total);
    for (int64_t i = 0; i < to_copy; ++i) {
      values[i] = summary.singular_values[static_cast<size_t>(i)];
    }
    if (count) *count = total;
    if (rank) *rank = static_cast<int64_t>(summary.rank);
    if (condition_ratio) *condition_ratio = summary.condition_ratio;
  });
}

void dplr_workload_free(dplr_workload* w) { delete w; }

void dplr_solver_config_init(dplr_solver_config* cfg) {
  if (!cfg) return;
  const dplr::SolverConfig defaults;
  cfg->r = static_cast<int64_t>(defaults.r);
  cfg->gamma = defaults.gamma;
  cfg->beta0 = defaults.beta0;
  cfg->beta_max = defaults.beta_max;
  cfg->beta_double_every = static_cast<int64_t>(defaults.beta_double_every);
  cfg->outer_max = static_cast<int64_t>(defaults.outer_max);
  cfg->inner_max = static_cast<int64_t>(defaults.inner_max);
  cfg->inner_rel_tol = defaults.inner_rel_tol;
  cfg->nesterov_max = static_cast<int64_t>(defaults.nesterov_max);
  cfg->residual_tol = defaults.residual_tol;
  cfg->deadline_seconds = defaults.deadline_seconds;
  cfg->seed = defaults.seed;
}

dplr_status dplr_decompose(const dplr_workload* w,
                           const dplr_solver_config* cfg,
                           dplr_decomposition** out) {
  if (!w) return fail_null("workload");
  if (!out) return fail_null("out");
  return guarded([&]() {
    dplr::SolverConfig sc;
    if (cfg) {
      sc.r = static_cast<Eigen::Index>(cfg->r);
      sc.gamma = cfg->gamma;
      sc.beta0 = cfg->beta0;
      sc.beta_max = cfg->beta_max;
      sc.beta_double_every = static_cast<Eigen::Index>(cfg->beta_double_every);
      sc.outer_max = static_cast<Eigen::Index>(cfg->outer_max);
      sc.inner_max = static_cast<Eigen::Index>(cfg->inner_max);
      sc.inner_rel_tol = cfg->inner_rel_tol;
      sc.nesterov_max = static_cast<Eigen::Index>(cfg->nesterov_max);
      sc.residual_tol = cfg->residual_tol;
      sc.deadline_seconds = cfg->deadline_seconds;
      sc.seed = cfg->seed;
    }
    *out = new dplr_decomposition{dplr::decompose(w->w, sc)};
  });
}

dplr_status dplr_decomposition_get_info(const dplr_decomposition* d,
                                        dplr_decomposition_info* out) {
  if (!d) return fail_null("decomposition");
  if (!out) return fail_null("out");
  return guarded([&]() {
    out->m = static_cast<int64_t>(d->d.b.rows());
    out->n = static_cast<int64_t>(d->d.l.cols());
    out->r = static_cast<int64_t>(d->d.r);
    out->gamma = d->d.gamma;
    out->residual = d->d.residual;
    out->objective = d->d.objective;
    out->scale = d->d.scale;
    out->l_sensitivity = d->d.l_sensitivity;
    out->iterations = static_cast<int64_t>(d->d.iterations);
    out->converged = d->d.converged ? 1 : 0;
  });
}

dplr_status dplr_decomposition_b(const dplr_decomposition* d, double* out) {
  if (!d) return fail_null("decomposition");
  if (!out) return fail_null("out");
  return guarded([&]() { copy_row_major(d->d.b, out); });
}

dplr_status dplr_decomposition_l(const dplr_decomposition* d, double* out) {
  if (!d) return fail_null("decomposition");
  if (!out) return fail_null("out");
  return guarded([&]() { copy_row_major(d->d.l, out); });
}

dplr_status dplr_decomposition_save(const dplr_decomposition* d,
                                    const char* dir) {
  if (!d) return fail_null("decomposition");
  if (!dir) return fail_null("dir");
  return guarded([&]() { dplr::save_decomposition(d->d, dir); });
}

dplr_status dplr_decomposition_load(const char* dir, dplr_decomposition** out) {
  if (!dir) return fail_null("dir");
  if (!out) return fail_null("out");
  return guarded(
      [&]() { *out = new dplr_decomposition{dplr::load_decomposition(dir)}; });
}

void dplr_decomposition_free(dplr_decomposition* d) { delete d; }

dplr_status dplr_lrm_answer(const dplr_decomposition* d, const double* counts,
                            int64_t n, double epsilon, double unit_sensitivity,
                            uint64_t seed, double* answers) {
  if (!d) return fail_null("decomposition");
  if (!counts) return fail_null("counts");
  if (!answers) return fail_null("answers");
  if (n < 0) {
    g_last_error = "count length must be non-negative";
    return DPLR_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    const Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(counts, static_cast<Eigen::Index>(n));
    dplr::Rng rng(seed);
    const dplr::NoisyAnswer ans = dplr::lrm_answer(
        d->d, x, dplr::PrivacyParams{epsilon, unit_sensitivity}, rng, seed);
    Eigen::Map<Eigen::VectorXd>(answers, ans.values.size()) = ans.values;
  });
}

dplr_status dplr_expected_error_lrm(const dplr_decomposition* d,
                                    double epsilon, double unit_sensitivity,
                                    double* out) {
  if (!d) return fail_null("decomposition");
  if (!out) return fail_null("out");
  return guarded([&]() {
    *out = dplr::expected_error_lrm(
        d->d, dplr::PrivacyParams{epsilon, unit_sensitivity});
  });
}

dplr_status dplr_expected_error_nod(const dplr_workload* w, double epsilon,
                                    double unit_sensitivity, double* out) {
  if (!w) return fail_null("workload");
  if (!out) return fail_null("out");
  return guarded([&]() {
    *out = dplr::expected_error_nod(
        w->w, dplr::PrivacyParams{epsilon, unit_sensitivity});
  });
}

dplr_status dplr_expected_error_nor(const dplr_workload* w, double epsilon,
                                    double unit_sensitivity, double* out) {
  if (!w) return fail_null("workload");
  if (!out) return fail_null("out");
  return guarded([&]() {
    *out = dplr::expected_error_nor(
        w->w, dplr::PrivacyParams{epsilon, unit_sensitivity});
  });
}

dplr_status dplr_error_bounds_compute(const dplr_workload* w, double epsilon,
                                      double unit_sensitivity,
                                      dplr_error_bounds* out) {
  if (!w) return fail_null("workload");
  if (!out) return fail_null("out");
  return guarded([&]() {
    const dplr::PrivacyParams p{epsilon, unit_sensitivity};
    const dplr::SpectrumSummary summary = dplr::spectrum(w->w);
    const dplr::ApproxRatioReport ratio = dplr::approx_ratio_report(summary);
    out->upper = dplr::error_upper_bound(summary, p);
    out->lower = dplr::error_lower_bound(summary, p);
    out->approx_ratio = ratio.ratio;
    out->ratio_in_regime = ratio.in_regime ? 1 : 0;
    out->rank = static_cast<int64_t>(summary.rank);
    out->condition_ratio = summary.condition_ratio;
  });
}

dplr_status dplr_relaxed_error_bound(const dplr_decomposition* d,
                                     const double* counts, int64_t n,
                                     double epsilon, double unit_sensitivity,
                                     double* out) {
  if (!d) return fail_null("decomposition");
  if (!counts) return fail_null("counts");
  if (!out) return fail_null("out");
  if (n < 0) {
    g_last_error = "count length must be non-negative";
    return DPLR_ERR_INVALID_ARGUMENT;
  }
  return guarded([&]() {
    const Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(counts, static_cast<Eigen::Index>(n));
    if (x.size() != d->d.l.cols()) {
      throw dplr::InvalidArgument(
          "count vector length does not match factorization");
    }
    *out = dplr::relaxed_error_bound(
        d->d, x, dplr::PrivacyParams{epsilon, unit_sensitivity});
  });
}

dplr_status dplr_load_counts(const char* path, int strict, double** values,
                             int64_t* count) {
  if (!path) return fail_null("path");
  if (!values) return fail_null("values");
  if (!count) return fail_null("count");
  return guarded([&]() {
    const Eigen::VectorXd loaded = dplr::load_counts(path, strict != 0);
    double* buffer = new double[static_cast<size_t>(loaded.size())];
    Eigen::Map<Eigen::VectorXd>(buffer, loaded.size()) = loaded;
    *values = buffer;
    *count = static_cast<int64_t>(loaded.size());
  });
}

void dplr_buffer_free(double* values) { delete[] values; }

}  // extern "C"

namespace {

dplr_status run_with_config(const dplr::ExperimentConfig& cfg,
                            const char* csv_path, const char* json_path,
                            int64_t* failed_cells) {
  return guarded([&]() {
    const std::vector<dplr::ErrorReport> reports = dplr::run_experiment(cfg);
    {
      std::ofstream out(csv_path);
      if (!out) throw dplr::IoError(std::string("cannot write: ") + csv_path);
      dplr::emit_csv(reports, out);
      if (!out) throw dplr::IoError(std::string("write failed: ") + csv_path);
    }
    if (json_path) {
      std::ofstream out(json_path);
      if (!out) throw dplr::IoError(std::string("cannot write: ") + json_path);
      dplr::emit_json(reports, out);
      if (!out) throw dplr::IoError(std::string("write failed: ") + json_path);
    }
    int64_t failures = 0;
    for (const dplr::ErrorReport& row : reports) {
      if (!row.error.empty()) ++failures;
    }
    if (failed_cells) *failed_cells = failures;
  });
}

}  // namespace

extern "C" {

dplr_status dplr_run_experiment(const char* config_path, const char* csv_path,
                                const char* json_path, int64_t* failed_cells) {
  if (!config_path) return fail_null("config_path");
  if (!csv_path) return fail_null("csv_path");
  dplr::ExperimentConfig cfg;
  const dplr_status loaded =
      guarded([&]() { cfg = dplr::load_experiment_config(config_path); });
  if (loaded != DPLR_OK) return loaded;
  return run_with_config(cfg, csv_path, json_path, failed_cells);
}

dplr_status dplr_run_experiment_text(const char* config_json,
                                     const char* csv_path,
                                     const char* json_path,
                                     int64_t* failed_cells) {
  if (!config_json) return fail_null("config_json");
  if (!csv_path) return fail_null("csv_path");
  dplr::ExperimentConfig cfg;
  const dplr_status parsed =
      guarded([&]() { cfg = dplr::parse_experiment_config(config_json); });
  if (parsed != DPLR_OK) return parsed;
  return run_with_config(cfg, csv_path, json_path, failed_cells);
}

}  // extern "C"
