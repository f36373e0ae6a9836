/* dplowrank — differentially private batch linear counting queries.
 *
 * C interface to the low-rank factorization mechanism, its baselines, the
 * analytic error bounds, and the benchmark harness. All functions return a
 * dplr_status; on any non-OK status dplr_last_error() describes the failure
 * (thread-local). Handles are opaque and must be released with the matching
 * *_free function. All matrix buffers exchanged through this interface are
 * row-major.
 */
#ifndef DPLOWRANK_H
#define DPLOWRANK_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dplr_status {
  DPLR_OK = 0,
  DPLR_ERR_INVALID_ARGUMENT = 1,
  DPLR_ERR_IO = 2,
  DPLR_ERR_DOMAIN = 3,
  DPLR_ERR_INTERNAL = 4
} dplr_status;

/* Message for the calling thread's most recent failure; empty on success. */
const char* dplr_last_error(void);

const char* dplr_version(void);

typedef struct dplr_workload dplr_workload;
typedef struct dplr_decomposition dplr_decomposition;

/* -- Workloads ---------------------------------------------------------- */

/* kind: "discrete" (p = probability of a +1 entry), "range", or "related"
 * (s = number of base queries, 1 <= s <= min(m, n)). Unused parameters are
 * ignored. */
dplr_status dplr_workload_generate(const char* kind, int64_t m, int64_t n,
                                   double p, int64_t s, uint64_t seed,
                                   dplr_workload** out);

/* Wraps caller-provided entries (copied; m rows of n values, row-major). */
dplr_status dplr_workload_from_data(const double* entries, int64_t m,
                                    int64_t n, dplr_workload** out);

/* Reads a workload CSV; a sibling .meta.json (as written by save) restores
 * the generator parameters. */
dplr_status dplr_workload_load(const char* path, dplr_workload** out);

/* Writes <prefix>.csv and <prefix>.meta.json. */
dplr_status dplr_workload_save(const dplr_workload* w, const char* prefix);

dplr_status dplr_workload_dims(const dplr_workload* w, int64_t* m, int64_t* n);

/* Copies the m*n entries row-major into out (caller allocates). */
dplr_status dplr_workload_entries(const dplr_workload* w, double* out);

/* Maximum column absolute sum (L1 sensitivity of the exact batch answers). */
dplr_status dplr_workload_sensitivity(const dplr_workload* w, double* out);

/* Writes min(capacity, count) leading singular values into values (pass
 * capacity 0 to query sizes only). count receives the full spectrum length,
 * rank the number of values above the relative cutoff, condition_ratio the
 * ratio of the largest to the smallest counted value. Any output pointer may
 * be NULL. */
dplr_status dplr_workload_spectrum(const dplr_workload* w, double* values,
                                   int64_t capacity, int64_t* count,
                                   int64_t* rank, double* condition_ratio);

void dplr_workload_free(dplr_workload* w);

/* -- Factorization ------------------------------------------------------ */

typedef struct dplr_solver_config {
  int64_t r;               /* factor width; 0 = round(1.2 * rank)           */
  double gamma;            /* residual allowance ||W - BL||_F; 0 = exact    */
  double beta0;            /* initial penalty weight                        */
  double beta_max;         /* penalty ceiling                               */
  int64_t beta_double_every; /* outer iterations between penalty doublings  */
  int64_t outer_max;       /* outer iteration cap                           */
  int64_t inner_max;       /* alternations per outer iteration              */
  double inner_rel_tol;    /* relative objective change to end alternation  */
  int64_t nesterov_max;    /* projected-gradient steps per L solve          */
  double residual_tol;     /* convergence residual; < 0 = use gamma         */
  double deadline_seconds; /* < 0 = no limit; else stop cooperatively       */
  uint64_t seed;
} dplr_solver_config;

/* Fills cfg with the documented defaults. */
void dplr_solver_config_init(dplr_solver_config* cfg);

/* Minimizes trace(B^T B) subject to ||W - BL||_F <= gamma with every column
 * of L having absolute sum at most 1. Returns the best feasible iterate, or
 * the minimum-residual iterate flagged not-converged when none is feasible
 * (still DPLR_OK; check the info struct). */
dplr_status dplr_decompose(const dplr_workload* w,
                           const dplr_solver_config* cfg,
                           dplr_decomposition** out);

typedef struct dplr_decomposition_info {
  int64_t m;
  int64_t n;
  int64_t r;
  double gamma;          /* allowance the solve ran with                  */
  double residual;       /* achieved ||W - BL||_F                         */
  double objective;      /* trace(B^T B)                                  */
  double scale;          /* equals objective                              */
  double l_sensitivity;  /* max column absolute sum of L                  */
  int64_t iterations;
  int converged;
} dplr_decomposition_info;

dplr_status dplr_decomposition_get_info(const dplr_decomposition* d,
                                        dplr_decomposition_info* out);

/* Copies B (m rows of r values) / L (r rows of n values), row-major. */
dplr_status dplr_decomposition_b(const dplr_decomposition* d, double* out);
dplr_status dplr_decomposition_l(const dplr_decomposition* d, double* out);

/* Directory round trip: B.csv, L.csv, meta.json. */
dplr_status dplr_decomposition_save(const dplr_decomposition* d,
                                    const char* dir);
dplr_status dplr_decomposition_load(const char* dir, dplr_decomposition** out);

void dplr_decomposition_free(dplr_decomposition* d);

/* -- Mechanisms --------------------------------------------------------- */

/* Answers the workload through the factorization: B (L*counts + eta) with
 * eta Laplace noise calibrated to epsilon-differential privacy for a change
 * of unit_sensitivity in one count. counts has n entries; answers receives
 * m values. Refuses factorizations whose column sensitivity exceeds
 * 1 + 1e-6. */
dplr_status dplr_lrm_answer(const dplr_decomposition* d, const double* counts,
                            int64_t n, double epsilon, double unit_sensitivity,
                            uint64_t seed, double* answers);

/* Analytic expected total squared errors over the whole batch. */
dplr_status dplr_expected_error_lrm(const dplr_decomposition* d,
                                    double epsilon, double unit_sensitivity,
                                    double* out);
dplr_status dplr_expected_error_nod(const dplr_workload* w, double epsilon,
                                    double unit_sensitivity, double* out);
dplr_status dplr_expected_error_nor(const dplr_workload* w, double epsilon,
                                    double unit_sensitivity, double* out);

/* -- Error bounds ------------------------------------------------------- */

typedef struct dplr_error_bounds {
  double upper;           /* rank * sum(sigma_i^2) / eps^2; reported without
                             the 2x noise-variance factor                   */
  double lower;           /* order-of-magnitude only; never a pass/fail
                             oracle                                        */
  double approx_ratio;    /* (condition_ratio / 4)^2 * rank                */
  int ratio_in_regime;    /* the ratio guarantee needs rank > 5            */
  int64_t rank;
  double condition_ratio;
} dplr_error_bounds;

dplr_status dplr_error_bounds_compute(const dplr_workload* w, double epsilon,
                                      double unit_sensitivity,
                                      dplr_error_bounds* out);

/* Data-dependent bound for an inexact factorization:
 * 2 * objective * (unit_sensitivity/epsilon)^2 + residual^2 * sum(counts^2). */
dplr_status dplr_relaxed_error_bound(const dplr_decomposition* d,
                                     const double* counts, int64_t n,
                                     double epsilon, double unit_sensitivity,
                                     double* out);

/* -- Counts ------------------------------------------------------------- */

/* Reads one non-negative count per line. strict non-zero: a negative value
 * is an error naming its line; strict zero: warn on stderr and clamp to
 * zero. On success *values is allocated (release with dplr_buffer_free) and
 * *count receives its length. */
dplr_status dplr_load_counts(const char* path, int strict, double** values,
                             int64_t* count);

void dplr_buffer_free(double* values);

/* -- Harness ------------------------------------------------------------ */

/* Runs the JSON experiment config at config_path, writes the CSV report to
 * csv_path and, when json_path is non-NULL, the JSON report too. Per-cell
 * failures are recorded in the report and do not abort the run;
 * failed_cells (may be NULL) receives the number of failed rows. */
dplr_status dplr_run_experiment(const char* config_path, const char* csv_path,
                                const char* json_path, int64_t* failed_cells);

/* Same contract, but the config is passed as JSON text instead of a path
 * (callers that merge command-line overrides into a loaded file use this). */
dplr_status dplr_run_experiment_text(const char* config_json,
                                     const char* csv_path,
                                     const char* json_path,
                                     int64_t* failed_cells);

#ifdef __cplusplus
}
#endif

#endif /* DPLOWRANK_H */
