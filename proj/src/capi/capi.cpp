#include "driftctl/driftctl.h"

#include <cmath>
#include <limits>
#include <new>
#include <string>

#include "config.hpp"
#include "constrained.hpp"
#include "report.hpp"
#include "simulator.hpp"

using namespace driftctl;

struct dc_model {
  CostModel m;
};

struct dc_solution {
  CostModel model;
  BellmanSolution sol;
  RejectionReport rej;
};

struct dc_config {
  RunConfig c;
};

static_assert(int(ErrorCode::kParseError) == DC_PARSE_ERROR);
static_assert(int(ErrorCode::kUnsupported) == DC_UNSUPPORTED);
static_assert(int(ErrorCode::kNotMonotone) == DC_NOT_MONOTONE);
static_assert(int(ErrorCode::kValidationFailed) == DC_VALIDATION_FAILED);

namespace {

thread_local std::string g_last_error;

template <class F>
dc_status guard(F&& f) noexcept {
  try {
    f();
    return DC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return dc_status(int(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return DC_INTERNAL;
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::kUsage, std::string(what) + " must not be NULL");
}

BellmanOptions bellman_opts(const dc_solve_options* o) {
  BellmanOptions b;
  if (o && o->n_z) b.n_z = o->n_z;
  if (o && o->residual_tol > 0.0) b.residual_tol = o->residual_tol;
  return b;
}

PieceCost piece_cost(const dc_piece_cost& c) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto par = [&](int i, double dflt) {
    return std::isnan(c.param[i]) ? dflt : c.param[i];
  };
  switch (c.kind) {
    case DC_COST_LINEAR:
      return cost::Linear{par(0, 0.0), par(1, 0.0)};
    case DC_COST_POWER:
      return cost::Power{par(0, 1.0), par(1, 2.0), c.param[2], par(3, 0.0)};
    case DC_COST_EXPONENTIAL:
      return cost::Exponential{par(0, 1.0), c.param[1], par(2, 1.0),
                               std::isnan(c.param[3]) ? nan : c.param[3]};
    case DC_COST_TABLE:
      if (c.table_n && (!c.table_x || !c.table_y))
        fail(ErrorCode::kUsage, "table cost needs table_x and table_y");
      return cost::Table{std::vector<double>(c.table_x, c.table_x + c.table_n),
                         std::vector<double>(c.table_y, c.table_y + c.table_n)};
  }
  fail(ErrorCode::kUsage, "unknown cost kind");
}

SimConfig sim_config(const dc_sim_config* c) {
  need(c, "sim config");
  SimConfig s;
  s.dt = c->dt;
  s.T = c->T;
  s.n_reps = c->n_reps;
  s.seed = c->seed;
  s.burn_in = c->burn_in;
  s.z0 = c->z0;
  s.scheme = c->scheme == DC_SCHEME_PROJECTION ? ReflectionScheme::kProjection
                                               : ReflectionScheme::kBridge;
  s.tol_mc = c->tol_mc;
  s.hist_bins = c->hist_bins;
  s.threads = c->threads;
  return s;
}

void export_sim(const SimResult& r, dc_sim_result* out, double* hist) {
  out->avg_cost = {r.avg_cost.mean, r.avg_cost.se};
  out->drop_rate = {r.drop_rate.mean, r.drop_rate.se};
  out->lower_rate = {r.lower_rate.mean, r.lower_rate.se};
  out->n_reps = r.n_reps;
  out->steps_per_rep = r.steps_per_rep;
  if (hist)
    for (std::size_t i = 0; i < r.histogram.size(); ++i) hist[i] = r.histogram[i];
}

Summary solution_summary(const dc_solution& s) {
  const auto& sol = s.sol;
  const auto& r = s.rej;
  return {{"sigma2", format_number(sol.params.sigma2)},
          {"b", format_number(sol.params.b)},
          {"p", format_number(sol.params.p)},
          {"gamma", format_number(sol.gamma)},
          {"beta", format_number(r.beta)},
          {"gap", format_number(r.gap)},
          {"residual_max", format_number(sol.residual_max)},
          {"u_residual_max", format_number(r.u.residual_max)},
          {"beta_upper", format_number(r.beta_upper)},
          {"beta_lower", format_number(r.beta_lower)},
          {"p0", format_number(r.p0)},
          {"shooting_mismatch", format_number(sol.v->shooting_mismatch())}};
}

}  // namespace

extern "C" {

const char* dc_version(void) { return "1.0.0"; }

const char* dc_last_error(void) { return g_last_error.c_str(); }

const char* dc_status_name(dc_status status) {
  if (status == DC_INTERNAL) return "Internal";
  return error_name(ErrorCode(int(status)));
}

dc_status_class dc_status_classify(dc_status s) {
  if (s == DC_OK) return DC_CLASS_OK;
  if (s <= DC_IO_ERROR) return DC_CLASS_USAGE;
  if (s <= DC_UNSUPPORTED) return DC_CLASS_MODEL;
  if (s == DC_VALIDATION_FAILED) return DC_CLASS_VALIDATION;
  return DC_CLASS_NUMERICAL;
}

dc_status dc_model_create(const dc_interval* pieces, const dc_piece_cost* costs,
                          size_t n, dc_model** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    if (n) {
      need(pieces, "pieces");
      need(costs, "costs");
    }
    std::vector<Interval> iv;
    CostSpec spec;
    for (size_t i = 0; i < n; ++i) {
      iv.push_back({pieces[i].lo, pieces[i].hi});
      spec.pieces.push_back(piece_cost(costs[i]));
    }
    *out = new dc_model{CostModel::validate(ActionSet(std::move(iv)), std::move(spec))};
  });
}

void dc_model_free(dc_model* model) { delete model; }

const char* dc_model_growth(const dc_model* model) {
  return model ? model->m.growth_description().c_str() : "";
}

double dc_model_theta_min(const dc_model* model) { return model->m.theta_min(); }
double dc_model_theta_max(const dc_model* model) { return model->m.theta_max(); }

dc_status dc_wireless_setup(double lambda, double d, double alpha, double sigma,
                            double theta_min, dc_model** out,
                            double* sigma2_out, double* b_out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    WirelessSetup w = wireless_setup(lambda, d, alpha, sigma, theta_min);
    if (sigma2_out) *sigma2_out = w.system.sigma2;
    if (b_out) *b_out = w.system.b;
    *out = new dc_model{std::move(w.model)};
  });
}

dc_status dc_eval_cost(const dc_model* model, double x, double* out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    *out = model->m.eval_cost(x);
  });
}

dc_status dc_psi(const dc_model* model, double y, double* out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    if (!(y >= 0.0)) fail(ErrorCode::kNonPositiveParameter, "y must be >= 0");
    *out = model->m.psi(y);
  });
}

dc_status dc_phi(const dc_model* model, double y, double* out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    if (!(y >= 0.0)) fail(ErrorCode::kNonPositiveParameter, "y must be >= 0");
    *out = model->m.phi(y);
  });
}

dc_status dc_phi_star(const dc_model* model, double p, double* out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    if (!(p > 0.0)) fail(ErrorCode::kNonPositiveParameter, "p must be > 0");
    *out = model->m.phi_star(p);
  });
}

double dc_p_zero(const dc_model* model) { return model->m.p_zero(); }

dc_status dc_psi_breakpoints(const dc_model* model, double* buf, size_t cap,
                             size_t* n) {
  return guard([&] {
    need(model, "model");
    const auto& bp = model->m.psi_breakpoints();
    if (n) *n = bp.size();
    for (size_t i = 0; i < bp.size() && i < cap; ++i) buf[i] = bp[i];
  });
}

dc_status dc_solve(const dc_model* model, const dc_params* params,
                   const dc_solve_options* options, dc_solution** out) {
  return guard([&] {
    need(model, "model");
    need(params, "params");
    need(out, "out");
    *out = nullptr;
    const BellmanOptions opts = bellman_opts(options);
    const ProblemParams pp{params->sigma2, params->b, params->p};
    BellmanSolution sol = solve_bellman(model->m, pp, opts);
    RejectionReport rej = analyze_rejection(model->m, sol, opts.residual_tol);
    *out = new dc_solution{model->m, std::move(sol), std::move(rej)};
  });
}

void dc_solution_free(dc_solution* sol) { delete sol; }

void dc_solution_summary_get(const dc_solution* s, dc_solution_summary* out) {
  if (!s || !out) return;
  out->sigma2 = s->sol.params.sigma2;
  out->b = s->sol.params.b;
  out->p = s->sol.params.p;
  out->gamma = s->sol.gamma;
  out->beta = s->rej.beta;
  out->beta_upper = s->rej.beta_upper;
  out->beta_lower = s->rej.beta_lower;
  out->p0 = s->rej.p0;
  out->gap = s->rej.gap;
  out->residual_max = s->sol.residual_max;
  out->u_residual_max = s->rej.u.residual_max;
  out->shooting_mismatch = s->sol.v->shooting_mismatch();
}

size_t dc_solution_size(const dc_solution* s) { return s ? s->sol.z().size() : 0; }

void dc_solution_grid(const dc_solution* s, double* z, double* v, double* f,
                      double* theta) {
  if (!s) return;
  const auto& sol = s->sol;
  for (size_t i = 0; i < sol.z().size(); ++i) {
    if (z) z[i] = sol.z()[i];
    if (v) v[i] = sol.v->v()[i];
    if (f) f[i] = sol.f[i];
    if (theta) theta[i] = sol.theta[i];
  }
}

void dc_solution_u(const dc_solution* s, double* u) {
  if (!s || !u) return;
  for (size_t i = 0; i < s->rej.u.u.size(); ++i) u[i] = s->rej.u.u[i];
}

dc_status dc_solution_policy(const dc_solution* s, double z, double* theta) {
  return guard([&] {
    need(s, "solution");
    need(theta, "theta");
    *theta = policy(s->sol, z);
  });
}

dc_status dc_solution_write_csv(const dc_solution* s, const char* path) {
  return guard([&] {
    need(s, "solution");
    need(path, "path");
    write_text(path, solution_csv(s->sol));
  });
}

dc_status dc_solution_write_summary(const dc_solution* s, const char* path) {
  return guard([&] {
    need(s, "solution");
    need(path, "path");
    write_text(path, summary_text(solution_summary(*s)));
  });
}

dc_status dc_beta_bounds(const dc_model* model, double sigma2, double b,
                         double* upper, double* lower) {
  return guard([&] {
    need(model, "model");
    ProblemParams{sigma2, b, 1.0}.check();
    const BetaBounds bb = beta_bounds(model->m, sigma2, b);
    if (upper) *upper = bb.upper;
    if (lower) *lower = bb.lower;
  });
}

dc_status dc_beta_constant(double theta0, double sigma2, double b, double* out) {
  return guard([&] {
    need(out, "out");
    ProblemParams{sigma2, b, 1.0}.check();
    if (!std::isfinite(theta0))
      fail(ErrorCode::kNonPositiveParameter, "theta0 must be finite");
    *out = beta_constant(theta0, sigma2, b);
  });
}

dc_status dc_sweep(const dc_model* model, double sigma2, double b,
                   const double* p, size_t n, const dc_solve_options* options,
                   dc_sweep_row* rows) {
  return guard([&] {
    need(model, "model");
    if (n) {
      need(p, "p");
      need(rows, "rows");
    }
    const BellmanOptions opts = bellman_opts(options);
    for (size_t i = 0; i < n; ++i) {
      const BellmanSolution sol = solve_bellman(model->m, {sigma2, b, p[i]}, opts);
      const RejectionReport rej = analyze_rejection(model->m, sol, opts.residual_tol);
      rows[i] = {p[i], sol.gamma, rej.beta, rej.gap};
    }
  });
}

dc_status dc_sweep_check(const dc_sweep_row* rows, size_t n, double tol) {
  return guard([&] {
    if (n) need(rows, "rows");
    for (size_t i = 1; i < n; ++i) {
      const dc_sweep_row& a = rows[i - 1];
      const dc_sweep_row& c = rows[i];
      if (!(c.p > a.p)) fail(ErrorCode::kUsage, "sweep p values must increase");
      if (c.beta > a.beta * (1.0 + tol))
        fail(ErrorCode::kNotMonotone,
             "beta increases from " + format_number(a.beta) + " at p = " +
                 format_number(a.p) + " to " + format_number(c.beta) +
                 " at p = " + format_number(c.p));
      if (c.gamma < a.gamma * (1.0 - tol))
        fail(ErrorCode::kNotMonotone,
             "gamma decreases from " + format_number(a.gamma) + " at p = " +
                 format_number(a.p) + " to " + format_number(c.gamma) +
                 " at p = " + format_number(c.p));
    }
  });
}

dc_status dc_sweep_write_csv(const dc_sweep_row* rows, size_t n,
                             const char* path) {
  return guard([&] {
    need(path, "path");
    if (n) need(rows, "rows");
    std::vector<SweepRow> r;
    for (size_t i = 0; i < n; ++i)
      r.push_back({rows[i].p, rows[i].gamma, rows[i].beta, rows[i].gap});
    write_text(path, sweep_csv(r));
  });
}

dc_status dc_constrained(const dc_model* model, double sigma2, double b,
                         double beta_hat, const dc_solve_options* options,
                         dc_constrained_result* out,
                         dc_solution** solution_out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    if (solution_out) *solution_out = nullptr;
    ConstrainedOptions opts;
    opts.bellman = bellman_opts(options);
    ConstrainedResult r = solve_pstar(model->m, {sigma2, b}, {beta_hat}, opts);
    out->slack = r.status == ConstrainedResult::Status::kSlack;
    out->beta_hat = r.beta_hat;
    out->p_star = r.p_star;
    out->gamma = r.gamma;
    out->beta = r.beta;
    out->energy_cost = r.energy_cost;
    out->beta_upper = r.bounds.upper;
    out->beta_lower = r.bounds.lower;
    out->evaluations = r.evaluations;
    if (solution_out && r.solution) {
      RejectionReport rej =
          analyze_rejection(model->m, *r.solution, opts.bellman.residual_tol);
      *solution_out = new dc_solution{model->m, std::move(*r.solution), std::move(rej)};
    }
  });
}

void dc_sim_config_default(dc_sim_config* cfg) {
  if (!cfg) return;
  const SimConfig s;
  cfg->dt = s.dt;
  cfg->T = s.T;
  cfg->n_reps = s.n_reps;
  cfg->seed = s.seed;
  cfg->burn_in = s.burn_in;
  cfg->z0 = s.z0;
  cfg->scheme = DC_SCHEME_BRIDGE;
  cfg->tol_mc = s.tol_mc;
  cfg->hist_bins = s.hist_bins;
  cfg->threads = s.threads;
}

dc_status dc_simulate_optimal(const dc_solution* s, const dc_sim_config* cfg,
                              dc_sim_result* out, double* histogram) {
  return guard([&] {
    need(s, "solution");
    need(out, "out");
    const SimResult r = simulate(s->model, PolicyProfile::optimal(s->sol),
                                 s->sol.params, sim_config(cfg));
    export_sim(r, out, histogram);
  });
}

dc_status dc_simulate_constant(const dc_model* model, const dc_params* params,
                               double theta0, const dc_sim_config* cfg,
                               dc_sim_result* out, double* histogram) {
  return guard([&] {
    need(model, "model");
    need(params, "params");
    need(out, "out");
    const ProblemParams pp{params->sigma2, params->b, params->p};
    const SimResult r = simulate(model->m, PolicyProfile::constant(theta0, pp.b),
                                 pp, sim_config(cfg));
    export_sim(r, out, histogram);
  });
}

dc_status dc_validate(const dc_solution* s, const dc_sim_config* cfg,
                      dc_validation* out, double* histogram) {
  return guard([&] {
    need(s, "solution");
    need(out, "out");
    const ValidationReport r = validate_solution(s->model, s->sol, s->rej, sim_config(cfg));
    export_sim(r.sim, &out->sim, histogram);
    out->gamma = r.cost.target;
    out->beta = r.drop.target;
    out->cost_allowed = r.cost.allowed;
    out->drop_allowed = r.drop.allowed;
    out->cost_pass = r.cost.pass;
    out->drop_pass = r.drop.pass;
    require_passed(r);
  });
}

dc_status dc_compare_constants(const dc_solution* s, const double* theta0,
                               size_t n, const dc_sim_config* cfg,
                               dc_comparison_row* rows,
                               dc_estimate* optimal_cost) {
  return guard([&] {
    need(s, "solution");
    if (n) {
      need(theta0, "theta0");
      need(rows, "rows");
    }
    std::vector<std::pair<std::string, PolicyProfile>> alts;
    for (size_t i = 0; i < n; ++i)
      alts.emplace_back("constant " + format_number(theta0[i]),
                        PolicyProfile::constant(theta0[i], s->sol.params.b));
    const Comparison c = compare_policies(s->model, PolicyProfile::optimal(s->sol),
                                          alts, s->sol.params, sim_config(cfg));
    if (optimal_cost)
      *optimal_cost = {c.entries[0].avg_cost.mean, c.entries[0].avg_cost.se};
    for (size_t i = 0; i < n; ++i) {
      const PolicyCost& e = c.entries[i + 1];
      rows[i] = {theta0[i], {e.avg_cost.mean, e.avg_cost.se},
                 {e.diff.mean, e.diff.se}, e.reference_wins};
    }
  });
}

dc_status dc_write_path(const dc_solution* s, const dc_sim_config* cfg,
                        size_t stride, const char* path) {
  return guard([&] {
    need(s, "solution");
    need(path, "path");
    const auto rows = simulate_path(s->model, PolicyProfile::optimal(s->sol),
                                    s->sol.params, sim_config(cfg), stride);
    write_text(path, path_csv(rows));
  });
}

dc_status dc_write_histogram(const double* histogram, size_t bins, double b,
                             const char* path) {
  return guard([&] {
    need(histogram, "histogram");
    need(path, "path");
    write_text(path, histogram_csv(std::vector<double>(histogram, histogram + bins), b));
  });
}

dc_status dc_config_load(const char* path, dc_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new dc_config{load_config(path)};
  });
}

dc_status dc_config_parse(const char* text, dc_config** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = nullptr;
    *out = new dc_config{parse_config(text)};
  });
}

void dc_config_free(dc_config* cfg) { delete cfg; }

dc_status dc_config_model(const dc_config* cfg, dc_model** out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    *out = nullptr;
    *out = new dc_model{cfg->c.model()};
  });
}

dc_status dc_config_params(const dc_config* cfg, dc_params* out) {
  return guard([&] {
    need(cfg, "config");
    need(out, "out");
    const SystemParams s = cfg->c.system();
    out->sigma2 = s.sigma2;
    out->b = s.b;
    out->p = cfg->c.p ? *cfg->c.p : std::numeric_limits<double>::quiet_NaN();
  });
}

double dc_config_beta_hat(const dc_config* cfg) {
  return cfg && cfg->c.beta_hat ? *cfg->c.beta_hat
                                 : std::numeric_limits<double>::quiet_NaN();
}

void dc_config_solve_options(const dc_config* cfg, dc_solve_options* out) {
  if (!out) return;
  out->n_z = cfg && cfg->c.n_z ? *cfg->c.n_z : 0;
  out->residual_tol = 0.0;
}

void dc_config_sim(const dc_config* cfg, dc_sim_config* out) {
  if (!out) return;
  dc_sim_config_default(out);
  if (!cfg) return;
  const SimConfig& s = cfg->c.sim;
  out->dt = s.dt;
  out->T = s.T;
  out->n_reps = s.n_reps;
  out->seed = s.seed;
  out->burn_in = s.burn_in;
  out->z0 = s.z0;
  out->scheme = s.scheme == ReflectionScheme::kProjection ? DC_SCHEME_PROJECTION
                                                          : DC_SCHEME_BRIDGE;
  out->tol_mc = s.tol_mc;
  out->hist_bins = s.hist_bins;
  out->threads = s.threads;
}

int dc_config_has_sim(const dc_config* cfg) { return cfg && cfg->c.has_sim; }

size_t dc_config_dump_stride(const dc_config* cfg) {
  return cfg ? cfg->c.dump_stride : 100;
}

const char* dc_config_output_dir(const dc_config* cfg) {
  return cfg ? cfg->c.out_dir.c_str() : ".";
}

}  // extern "C"
