/*
 * driftctl: optimal drift-rate control of a reflected diffusion on [0, b].
 *
 * Plain C interface. Objects are opaque handles created by dc_*_create /
 * dc_*_load / dc_solve and released with the matching dc_*_free. Every call
 * that can fail returns a dc_status; on failure dc_last_error() describes it
 * (thread-local, valid until the next failing call on the same thread).
 * Handles are immutable once created and may be shared across threads.
 */
#ifndef DRIFTCTL_H
#define DRIFTCTL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DC_API __declspec(dllexport)
#elif defined(__GNUC__)
#define DC_API __attribute__((visibility("default")))
#else
#define DC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dc_status {
  DC_OK = 0,
  DC_PARSE_ERROR,
  DC_USAGE,
  DC_IO_ERROR,
  DC_EMPTY_ACTION_SET,
  DC_MALFORMED_MODEL,
  DC_NOT_NONDECREASING,
  DC_NOT_NORMALIZED,
  DC_NOT_POSITIVE,
  DC_GROWTH_CONDITION_VIOLATED,
  DC_NOT_IN_ACTION_SET,
  DC_NON_POSITIVE_PARAMETER,
  DC_INFEASIBLE_BUDGET,
  DC_INADMISSIBLE_POLICY,
  DC_UNSUPPORTED,
  DC_GAMMA_OUT_OF_RANGE,
  DC_BRACKETING_FAILED,
  DC_ENDPOINT_MISMATCH,
  DC_STATE_OUT_OF_RANGE,
  DC_DUALITY_VIOLATION,
  DC_RESIDUAL_TOO_LARGE,
  DC_STEP_TOO_LARGE,
  DC_NOT_MONOTONE,
  DC_VALIDATION_FAILED,
  DC_INTERNAL = 100
} dc_status;

typedef enum dc_status_class {
  DC_CLASS_OK = 0,
  DC_CLASS_USAGE = 1,
  DC_CLASS_MODEL = 2,
  DC_CLASS_NUMERICAL = 3,
  DC_CLASS_VALIDATION = 4
} dc_status_class;

typedef struct dc_config dc_config;
typedef struct dc_model dc_model;
typedef struct dc_solution dc_solution;

DC_API const char* dc_version(void);
DC_API const char* dc_last_error(void);
/* Stable name such as "GrowthConditionViolated". */
DC_API const char* dc_status_name(dc_status status);
DC_API dc_status_class dc_status_classify(dc_status status);

/* ---- model ------------------------------------------------------------ */

typedef struct dc_interval {
  double lo;
  double hi; /* lo == hi: isolated point; hi may be INFINITY */
} dc_interval;

typedef enum dc_cost_kind {
  DC_COST_LINEAR = 0,      /* param = {slope, intercept}                   */
  DC_COST_POWER = 1,       /* param = {coeff, exponent, shift, offset}     */
  DC_COST_EXPONENTIAL = 2, /* param = {alpha, shift, scale, offset}        */
  DC_COST_TABLE = 3        /* table_x / table_y with table_n knots         */
} dc_cost_kind;

/* NaN in param selects the default (shift = piece lo; exponential offset =
 * -scale). */
typedef struct dc_piece_cost {
  dc_cost_kind kind;
  double param[4];
  const double* table_x;
  const double* table_y;
  size_t table_n;
} dc_piece_cost;

/* Validates the standing assumptions; the error text lists every violation. */
DC_API dc_status dc_model_create(const dc_interval* pieces,
                                 const dc_piece_cost* costs, size_t n,
                                 dc_model** out);
DC_API void dc_model_free(dc_model* model);
DC_API const char* dc_model_growth(const dc_model* model);
DC_API double dc_model_theta_min(const dc_model* model);
DC_API double dc_model_theta_max(const dc_model* model);

/* Exponential energy cost on [theta_min, inf) with b = lambda d and
 * sigma2 = sigma^2. sigma2_out and b_out may be NULL. */
DC_API dc_status dc_wireless_setup(double lambda, double d, double alpha,
                                   double sigma, double theta_min,
                                   dc_model** out, double* sigma2_out,
                                   double* b_out);

DC_API dc_status dc_eval_cost(const dc_model* model, double x, double* out);
DC_API dc_status dc_psi(const dc_model* model, double y, double* out);
DC_API dc_status dc_phi(const dc_model* model, double y, double* out);
DC_API dc_status dc_phi_star(const dc_model* model, double p, double* out);
DC_API double dc_p_zero(const dc_model* model);
/* Writes up to cap breakpoints of psi; *n receives the total count. */
DC_API dc_status dc_psi_breakpoints(const dc_model* model, double* buf,
                                    size_t cap, size_t* n);

/* ---- Bellman solve ---------------------------------------------------- */

typedef struct dc_params {
  double sigma2;
  double b;
  double p;
} dc_params;

typedef struct dc_solve_options {
  size_t n_z;          /* 0: 1025 */
  double residual_tol; /* 0: 1e-6 */
} dc_solve_options;

typedef struct dc_solution_summary {
  double sigma2, b, p;
  double gamma;
  double beta;
  double beta_upper; /* drop rate under the least drift */
  double beta_lower; /* drop rate under the greatest drift, 0 if unbounded */
  double p0;
  double gap; /* gamma - p beta, the energy part of the cost */
  double residual_max;
  double u_residual_max;
  double shooting_mismatch;
} dc_solution_summary;

/* Solves for gamma, v, f, theta and the drop rate. options may be NULL. */
DC_API dc_status dc_solve(const dc_model* model, const dc_params* params,
                          const dc_solve_options* options, dc_solution** out);
DC_API void dc_solution_free(dc_solution* sol);
DC_API void dc_solution_summary_get(const dc_solution* sol,
                                    dc_solution_summary* out);
DC_API size_t dc_solution_size(const dc_solution* sol);
/* Copies the grid columns; any pointer may be NULL. */
DC_API void dc_solution_grid(const dc_solution* sol, double* z, double* v,
                             double* f, double* theta);
/* u(z) on the same grid. */
DC_API void dc_solution_u(const dc_solution* sol, double* u);
DC_API dc_status dc_solution_policy(const dc_solution* sol, double z,
                                    double* theta);
DC_API dc_status dc_solution_write_csv(const dc_solution* sol,
                                       const char* path);
DC_API dc_status dc_solution_write_summary(const dc_solution* sol,
                                           const char* path);

/* ---- drop rate -------------------------------------------------------- */

DC_API dc_status dc_beta_bounds(const dc_model* model, double sigma2, double b,
                                double* upper, double* lower);
DC_API dc_status dc_beta_constant(double theta0, double sigma2, double b,
                                  double* out);

typedef struct dc_sweep_row {
  double p, gamma, beta, gap;
} dc_sweep_row;

/* One full solve per p; stops at the first failing solve. */
DC_API dc_status dc_sweep(const dc_model* model, double sigma2, double b,
                          const double* p, size_t n,
                          const dc_solve_options* options, dc_sweep_row* rows);
/* DC_OK when beta is nonincreasing and gamma nondecreasing in p up to tol
 * relative; DC_NOT_MONOTONE names the offending row otherwise. */
DC_API dc_status dc_sweep_check(const dc_sweep_row* rows, size_t n, double tol);
DC_API dc_status dc_sweep_write_csv(const dc_sweep_row* rows, size_t n,
                                    const char* path);

/* ---- constrained ------------------------------------------------------ */

typedef struct dc_constrained_result {
  int slack; /* 1: budget not binding, policy is the constant least drift */
  double beta_hat;
  double p_star; /* 0 when slack */
  double gamma;
  double beta;
  double energy_cost;
  double beta_upper;
  double beta_lower;
  size_t evaluations;
} dc_constrained_result;

/* solution_out (may be NULL) receives the solve at p*, or NULL when slack. */
DC_API dc_status dc_constrained(const dc_model* model, double sigma2, double b,
                                double beta_hat, const dc_solve_options* options,
                                dc_constrained_result* out,
                                dc_solution** solution_out);

/* ---- simulation ------------------------------------------------------- */

typedef enum dc_scheme { DC_SCHEME_BRIDGE = 0, DC_SCHEME_PROJECTION = 1 } dc_scheme;

typedef struct dc_sim_config {
  double dt;
  double T;
  size_t n_reps;
  uint64_t seed;
  double burn_in;
  double z0; /* NaN: b / 2 */
  dc_scheme scheme;
  double tol_mc;
  size_t hist_bins;
  size_t threads; /* 0: all hardware threads */
} dc_sim_config;

typedef struct dc_estimate {
  double mean;
  double se;
} dc_estimate;

typedef struct dc_sim_result {
  dc_estimate avg_cost;
  dc_estimate drop_rate;
  dc_estimate lower_rate;
  size_t n_reps;
  uint64_t steps_per_rep;
} dc_sim_result;

DC_API void dc_sim_config_default(dc_sim_config* cfg);

/* histogram (may be NULL) receives cfg->hist_bins occupancy fractions. */
DC_API dc_status dc_simulate_optimal(const dc_solution* sol,
                                     const dc_sim_config* cfg,
                                     dc_sim_result* out, double* histogram);
DC_API dc_status dc_simulate_constant(const dc_model* model,
                                      const dc_params* params, double theta0,
                                      const dc_sim_config* cfg,
                                      dc_sim_result* out, double* histogram);

typedef struct dc_validation {
  dc_sim_result sim;
  double gamma;
  double beta;
  double cost_allowed;
  double drop_allowed;
  int cost_pass;
  int drop_pass;
} dc_validation;

/* DC_VALIDATION_FAILED when either check fails; *out (and histogram, which
 * may be NULL) is filled either way. */
DC_API dc_status dc_validate(const dc_solution* sol, const dc_sim_config* cfg,
                             dc_validation* out, double* histogram);

typedef struct dc_comparison_row {
  double theta0;
  dc_estimate avg_cost;
  dc_estimate diff; /* alternative minus optimal, paired */
  int optimal_wins;
} dc_comparison_row;

/* Optimal policy against constant policies on common random numbers.
 * optimal_cost (may be NULL) receives the optimal policy's estimate. */
DC_API dc_status dc_compare_constants(const dc_solution* sol,
                                      const double* theta0, size_t n,
                                      const dc_sim_config* cfg,
                                      dc_comparison_row* rows,
                                      dc_estimate* optimal_cost);

/* One replication under the optimal policy, every stride steps, as CSV with
 * columns t, Z, L, U, xi. */
DC_API dc_status dc_write_path(const dc_solution* sol, const dc_sim_config* cfg,
                               size_t stride, const char* path);
DC_API dc_status dc_write_histogram(const double* histogram, size_t bins,
                                    double b, const char* path);

/* ---- run configuration files ------------------------------------------ */

DC_API dc_status dc_config_load(const char* path, dc_config** out);
DC_API dc_status dc_config_parse(const char* text, dc_config** out);
DC_API void dc_config_free(dc_config* cfg);
DC_API dc_status dc_config_model(const dc_config* cfg, dc_model** out);
/* p is NaN when the file gives beta_hat instead. */
DC_API dc_status dc_config_params(const dc_config* cfg, dc_params* out);
/* NaN when absent. */
DC_API double dc_config_beta_hat(const dc_config* cfg);
DC_API void dc_config_solve_options(const dc_config* cfg,
                                    dc_solve_options* out);
/* Defaults when the file has no sim block. */
DC_API void dc_config_sim(const dc_config* cfg, dc_sim_config* out);
DC_API int dc_config_has_sim(const dc_config* cfg);
DC_API size_t dc_config_dump_stride(const dc_config* cfg);
DC_API const char* dc_config_output_dir(const dc_config* cfg);

#ifdef __cplusplus
}
#endif

#endif /* DRIFTCTL_H */
