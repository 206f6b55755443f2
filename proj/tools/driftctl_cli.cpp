// driftctl command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftctl/driftctl.h"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kModel = 2, kNumerical = 3, kValidation = 4 };

struct Failure {
  dc_status status;
  std::string message;
};

int exit_code(dc_status s) { return int(dc_status_classify(s)); }

void check(dc_status s) {
  if (s != DC_OK) throw Failure{s, dc_last_error()};
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

using Lines = std::vector<std::pair<std::string, std::string>>;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text))
    throw Failure{DC_IO_ERROR, "cannot write '" + path.string() + "'"};
}

std::string key_values(const Lines& lines) {
  std::string s;
  for (const auto& [k, v] : lines) s += k + "=" + v + "\n";
  return s;
}

void print(const Lines& lines) { std::fputs(key_values(lines).c_str(), stdout); }

struct Handles {
  std::unique_ptr<dc_config, decltype(&dc_config_free)> cfg{nullptr, dc_config_free};
  std::unique_ptr<dc_model, decltype(&dc_model_free)> model{nullptr, dc_model_free};
};

using SolutionPtr = std::unique_ptr<dc_solution, decltype(&dc_solution_free)>;

struct Options {
  std::string config;
  std::string out;
  std::string p_grid;
  bool dump_path = false;
  std::optional<std::uint64_t> seed;
};

Handles load(const Options& o, bool with_model = true) {
  Handles h;
  dc_config* c = nullptr;
  check(dc_config_load(o.config.c_str(), &c));
  h.cfg.reset(c);
  if (with_model) {
    dc_model* m = nullptr;
    check(dc_config_model(c, &m));
    h.model.reset(m);
  }
  return h;
}

fs::path out_dir(const Options& o, const dc_config* cfg) {
  fs::path dir = o.out.empty() ? fs::path(dc_config_output_dir(cfg)) : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Failure{DC_IO_ERROR, "cannot create '" + dir.string() + "': " + ec.message()};
  return dir;
}

dc_params need_p(const dc_config* cfg) {
  dc_params p;
  check(dc_config_params(cfg, &p));
  if (std::isnan(p.p)) throw Failure{DC_PARSE_ERROR, "params block is missing 'p'"};
  return p;
}

SolutionPtr solve(const Handles& h, const dc_params& p) {
  dc_solve_options so;
  dc_config_solve_options(h.cfg.get(), &so);
  dc_solution* s = nullptr;
  check(dc_solve(h.model.get(), &p, &so, &s));
  return SolutionPtr(s, dc_solution_free);
}

Lines summary_lines(const dc_solution* s) {
  dc_solution_summary m;
  dc_solution_summary_get(s, &m);
  return {{"sigma2", num(m.sigma2)},        {"b", num(m.b)},
          {"p", num(m.p)},                  {"gamma", num(m.gamma)},
          {"beta", num(m.beta)},            {"gap", num(m.gap)},
          {"residual_max", num(m.residual_max)},
          {"u_residual_max", num(m.u_residual_max)},
          {"beta_upper", num(m.beta_upper)}, {"beta_lower", num(m.beta_lower)},
          {"p0", num(m.p0)}};
}

void write_u(const dc_solution* s, const fs::path& path) {
  const size_t n = dc_solution_size(s);
  std::vector<double> z(n), u(n);
  dc_solution_grid(s, z.data(), nullptr, nullptr, nullptr);
  dc_solution_u(s, u.data());
  std::string text = "z,u\n";
  for (size_t i = 0; i < n; ++i) text += num(z[i]) + "," + num(u[i]) + "\n";
  write_file(path, text);
}

int cmd_validate(const Options& o) {
  Handles h = load(o);
  const dc_model* m = h.model.get();
  size_t nb = 0;
  check(dc_psi_breakpoints(m, nullptr, 0, &nb));
  std::vector<double> bp(nb);
  check(dc_psi_breakpoints(m, bp.data(), nb, &nb));
  std::string bps;
  for (double y : bp) bps += (bps.empty() ? "" : " ") + num(y);
  std::printf("model: valid\n");
  std::printf("growth condition: %s\n", dc_model_growth(m));
  print({{"theta_min", num(dc_model_theta_min(m))},
         {"theta_max", num(dc_model_theta_max(m))},
         {"p0", num(dc_p_zero(m))},
         {"psi_breakpoints", bps}});
  return kOk;
}

int cmd_solve(const Options& o) {
  Handles h = load(o);
  const dc_params p = need_p(h.cfg.get());
  SolutionPtr s = solve(h, p);
  const fs::path dir = out_dir(o, h.cfg.get());
  check(dc_solution_write_csv(s.get(), (dir / "solution.csv").c_str()));
  check(dc_solution_write_summary(s.get(), (dir / "summary.txt").c_str()));
  print(summary_lines(s.get()));
  return kOk;
}

int cmd_beta(const Options& o) {
  Handles h = load(o);
  dc_params p;
  check(dc_config_params(h.cfg.get(), &p));
  double upper = 0, lower = 0;
  check(dc_beta_bounds(h.model.get(), p.sigma2, p.b, &upper, &lower));
  Lines lines = {{"beta_upper", num(upper)},
                 {"beta_lower", num(lower)},
                 {"p0", num(dc_p_zero(h.model.get()))}};
  const fs::path dir = out_dir(o, h.cfg.get());
  if (!std::isnan(p.p)) {
    SolutionPtr s = solve(h, p);
    dc_solution_summary m;
    dc_solution_summary_get(s.get(), &m);
    lines.insert(lines.begin(), {{"p", num(p.p)},
                                 {"beta", num(m.beta)},
                                 {"gamma", num(m.gamma)},
                                 {"gap", num(m.gap)},
                                 {"u_residual_max", num(m.u_residual_max)}});
    write_u(s.get(), dir / "u.csv");
  }
  write_file(dir / "beta.txt", key_values(lines));
  print(lines);
  return kOk;
}

int cmd_constrained(const Options& o) {
  Handles h = load(o);
  dc_params p;
  check(dc_config_params(h.cfg.get(), &p));
  const double beta_hat = dc_config_beta_hat(h.cfg.get());
  if (std::isnan(beta_hat))
    throw Failure{DC_PARSE_ERROR, "params block is missing 'beta_hat'"};
  dc_solve_options so;
  dc_config_solve_options(h.cfg.get(), &so);
  dc_constrained_result r;
  dc_solution* raw = nullptr;
  check(dc_constrained(h.model.get(), p.sigma2, p.b, beta_hat, &so, &r, &raw));
  SolutionPtr s(raw, dc_solution_free);

  const fs::path dir = out_dir(o, h.cfg.get());
  Lines lines = {{"status", r.slack ? "slack" : "binding"},
                 {"beta_hat", num(r.beta_hat)},
                 {"p_star", num(r.p_star)},
                 {"gamma", num(r.gamma)},
                 {"beta", num(r.beta)},
                 {"energy_cost", num(r.energy_cost)},
                 {"beta_upper", num(r.beta_upper)},
                 {"beta_lower", num(r.beta_lower)},
                 {"evaluations", std::to_string(r.evaluations)}};
  std::string policy = "z,theta\n";
  if (r.slack) {
    std::fprintf(stderr,
                 "warning: budget is slack (beta_hat >= %.17g); the least drift "
                 "%.17g meets it at zero energy cost\n",
                 r.beta_upper, dc_model_theta_min(h.model.get()));
    const size_t n = 1025;
    for (size_t i = 0; i < n; ++i)
      policy += num(p.b * double(i) / double(n - 1)) + "," +
                num(dc_model_theta_min(h.model.get())) + "\n";
  } else {
    const size_t n = dc_solution_size(s.get());
    std::vector<double> z(n), th(n);
    dc_solution_grid(s.get(), z.data(), nullptr, nullptr, th.data());
    for (size_t i = 0; i < n; ++i) policy += num(z[i]) + "," + num(th[i]) + "\n";
    check(dc_solution_write_csv(s.get(), (dir / "solution.csv").c_str()));
  }
  write_file(dir / "policy.csv", policy);
  write_file(dir / "constrained.txt", key_values(lines));
  print(lines);
  return kOk;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  auto bad = [&] {
    return Failure{DC_USAGE, "--p-grid expects lo:hi:n[:log], got '" + spec + "'"};
  };
  if (parts.size() != 3 && parts.size() != 4) throw bad();
  double lo, hi;
  long n;
  try {
    size_t used;
    lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw bad();
    hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw bad();
    n = std::stol(parts[2], &used);
    if (used != parts[2].size()) throw bad();
  } catch (const std::logic_error&) {
    throw bad();
  }
  const bool log = parts.size() == 4;
  if (log && parts[3] != "log") throw bad();
  if (!(lo > 0.0 && hi > lo && n >= 2)) throw bad();
  std::vector<double> out(size_t(n), 0.0);
  for (long i = 0; i < n; ++i) {
    const double t = double(i) / double(n - 1);
    out[size_t(i)] = log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                         : lo + t * (hi - lo);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

int cmd_sweep(const Options& o) {
  const std::vector<double> grid = parse_grid(o.p_grid);
  Handles h = load(o);
  dc_params p;
  check(dc_config_params(h.cfg.get(), &p));
  dc_solve_options so;
  dc_config_solve_options(h.cfg.get(), &so);
  std::vector<dc_sweep_row> rows(grid.size());
  check(dc_sweep(h.model.get(), p.sigma2, p.b, grid.data(), grid.size(), &so, rows.data()));
  const fs::path dir = out_dir(o, h.cfg.get());
  check(dc_sweep_write_csv(rows.data(), rows.size(), (dir / "sweep.csv").c_str()));
  std::printf("rows=%zu\nfile=%s\n", rows.size(), (dir / "sweep.csv").c_str());
  check(dc_sweep_check(rows.data(), rows.size(), 1e-9));
  return kOk;
}

int cmd_simulate(const Options& o) {
  Handles h = load(o);
  const dc_params p = need_p(h.cfg.get());
  dc_sim_config sc;
  dc_config_sim(h.cfg.get(), &sc);
  if (o.seed) sc.seed = *o.seed;
  SolutionPtr s = solve(h, p);
  const fs::path dir = out_dir(o, h.cfg.get());

  if (o.dump_path)
    check(dc_write_path(s.get(), &sc, dc_config_dump_stride(h.cfg.get()),
                        (dir / "path.csv").c_str()));
  dc_validation v;
  std::vector<double> hist(sc.hist_bins);
  const dc_status st = dc_validate(s.get(), &sc, &v, hist.data());
  if (st != DC_OK && st != DC_VALIDATION_FAILED) check(st);
  check(dc_write_histogram(hist.data(), hist.size(), p.b, (dir / "histogram.csv").c_str()));

  const bool pass = st == DC_OK;
  const Lines lines = {{"verdict", pass ? "PASS" : "FAIL"},
                       {"seed", std::to_string(sc.seed)},
                       {"n_reps", std::to_string(v.sim.n_reps)},
                       {"steps_per_rep", std::to_string(v.sim.steps_per_rep)},
                       {"gamma", num(v.gamma)},
                       {"avg_cost_mean", num(v.sim.avg_cost.mean)},
                       {"avg_cost_se", num(v.sim.avg_cost.se)},
                       {"avg_cost_allowed", num(v.cost_allowed)},
                       {"avg_cost_pass", v.cost_pass ? "1" : "0"},
                       {"beta", num(v.beta)},
                       {"drop_rate_mean", num(v.sim.drop_rate.mean)},
                       {"drop_rate_se", num(v.sim.drop_rate.se)},
                       {"drop_rate_allowed", num(v.drop_allowed)},
                       {"drop_rate_pass", v.drop_pass ? "1" : "0"},
                       {"lower_rate_mean", num(v.sim.lower_rate.mean)},
                       {"lower_rate_se", num(v.sim.lower_rate.se)}};
  write_file(dir / "simulation.txt", key_values(lines));
  print(lines);
  if (!pass) {
    std::fprintf(stderr, "error: ValidationFailed: %s\n", dc_last_error());
    return kValidation;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal drift-rate control of a reflected diffusion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dc_version()));
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "run configuration file")->required();
    sub->add_option("--out", o.out, "output directory (overrides the config)");
  };
  CLI::App* validate = app.add_subcommand("validate", "check the model assumptions");
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve for gamma, v, f and the policy");
  CLI::App* beta = app.add_subcommand("beta", "drop rate, its bounds and u(z)");
  CLI::App* constrained = app.add_subcommand("constrained", "penalty p* for a drop-rate budget");
  CLI::App* sweep = app.add_subcommand("sweep", "gamma and beta over a grid of p");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo check of a solve");
  for (CLI::App* s : {validate, solve_cmd, beta, constrained, sweep, simulate}) add_common(s);
  sweep->add_option("--p-grid", o.p_grid, "lo:hi:n[:log]")->required();
  simulate->add_flag("--dump-path", o.dump_path, "write one replication's path");
  simulate->add_option("--seed", o.seed, "seed (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*solve_cmd) return cmd_solve(o);
    if (*beta) return cmd_beta(o);
    if (*constrained) return cmd_constrained(o);
    if (*sweep) return cmd_sweep(o);
    if (*simulate) return cmd_simulate(o);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s: %s\n", dc_status_name(f.status), f.message.c_str());
    return exit_code(f.status);
  }
  return kUsage;
}
