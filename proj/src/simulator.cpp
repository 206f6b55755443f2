#include "simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include <boost/random/normal_distribution.hpp>

namespace driftctl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t rep,
                          std::uint64_t lane) {
  return splitmix64(splitmix64(splitmix64(seed) ^ rep) ^ lane);
}

// Policy sampled on a fine uniform grid. Cells that contain a jump or kink
// of the policy fall back to exact evaluation.
class PolicyTable {
 public:
  static constexpr std::size_t kCells = 1 << 16;

  PolicyTable(const CostModel& model, const PolicyProfile& policy)
      : model_(&model), policy_(&policy), b_(policy.b) {
    x_.resize(kCells + 1);
    c_.resize(kCells + 1);
    exact_.assign(kCells, 0);
    inv_h_ = double(kCells) / b_;
    for (std::size_t i = 0; i <= kCells; ++i) {
      const Action a = exact(b_ * double(i) / double(kCells));
      x_[i] = a.x;
      c_[i] = a.cost;
    }
    for (double q : policy.breaks) {
      if (!(q >= 0.0 && q <= b_)) continue;
      const double s = q * inv_h_;
      const std::size_t k = std::min<std::size_t>(std::size_t(s), kCells - 1);
      exact_[k] = 1;
      if (k > 0 && s == double(k)) exact_[k - 1] = 1;
    }
  }

  Action operator()(double z) const {
    const double s = z * inv_h_;
    std::size_t k = std::size_t(s);
    if (k >= kCells) k = kCells - 1;
    if (exact_[k]) return exact(z);
    const double w = s - double(k);
    return {x_[k] + w * (x_[k + 1] - x_[k]), c_[k] + w * (c_[k + 1] - c_[k])};
  }

  Action exact(double z) const {
    const double x = policy_->theta(z);
    if (!std::isfinite(x) || !model_->contains(x)) {
      std::ostringstream os;
      os.precision(12);
      os << "policy value " << x << " at z = " << z
         << " is not in the action set";
      fail(ErrorCode::kInadmissiblePolicy, os.str());
    }
    return {x, model_->eval_cost(x)};
  }

 private:
  const CostModel* model_;
  const PolicyProfile* policy_;
  double b_;
  double inv_h_;
  std::vector<double> x_, c_;
  std::vector<unsigned char> exact_;
};

struct RepTotals {
  double cost = 0.0;
  double U = 0.0;
  double L = 0.0;
  std::vector<std::uint64_t> hist;
};

struct Stepper {
  double sigma, sqdt, dt, b, var_dt;
  ReflectionScheme scheme;
  // Beyond this value of z * w / (sigma^2 dt) the bridge hits a barrier with
  // probability below exp(-40).
  static constexpr double kFar = 20.0;

  // Advances z by one step and returns the boundary pushes.
  template <class Uniform>
  void step(double& z, double theta, double normal, Uniform& uniform,
            double& dL, double& dU) const {
    const double w = z + sigma * sqdt * normal - theta * dt;
    dL = 0.0;
    dU = 0.0;
    if (scheme == ReflectionScheme::kProjection) {
      double y = w;
      if (y < 0.0) {
        dL = -y;
        y = 0.0;
      }
      if (y > b) {
        dU = y - b;
        y = b;
      }
      z = y;
      return;
    }
    double y = w;
    const double d = w - z;
    if (z * std::max(w, 0.0) < kFar * var_dt) {
      const double m = 0.5 * (z + w - std::sqrt(d * d - 2.0 * var_dt * std::log(uniform())));
      if (m < 0.0) {
        dL = -m;
        y += dL;
      }
    }
    const double zu = b - z, wu = b - y;
    if (zu * std::max(wu, 0.0) < kFar * var_dt) {
      const double du = y - z;
      const double m = 0.5 * (zu + wu - std::sqrt(du * du - 2.0 * var_dt * std::log(uniform())));
      if (m < 0.0) {
        dU = -m;
        y -= dU;
      }
    }
    z = std::clamp(y, 0.0, b);
  }
};

template <class Visit>
RepTotals run_rep(const PolicyTable& table, const ProblemParams& params,
                  const SimConfig& cfg, std::uint64_t rep, Visit&& visit) {
  std::mt19937_64 normal_engine(stream_seed(cfg.seed, rep, 0));
  std::mt19937_64 uniform_engine(stream_seed(cfg.seed, rep, 1));
  boost::random::normal_distribution<double> normal;
  auto uniform = [&] {
    // (0, 1]: the logarithm must stay finite.
    return 1.0 - std::generate_canonical<double, 53>(uniform_engine);
  };

  const double b = params.b;
  const double sigma = std::sqrt(params.sigma2);
  const Stepper st{sigma, std::sqrt(cfg.dt), cfg.dt, b, params.sigma2 * cfg.dt,
                   cfg.scheme};
  const std::uint64_t n = std::uint64_t(std::llround(cfg.T / cfg.dt));
  const std::uint64_t burn = std::uint64_t(std::llround(cfg.burn_in * double(n)));
  const double bins_per_z = double(cfg.hist_bins) / b;

  RepTotals r;
  r.hist.assign(cfg.hist_bins, 0);
  double z = std::isnan(cfg.z0) ? 0.5 * b : cfg.z0;
  double cost = 0.0, L = 0.0, U = 0.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    if (k == burn) {
      cost = 0.0;
      L = 0.0;
      U = 0.0;
    }
    const Action a = table(z);
    if (k >= burn) {
      std::size_t bin = std::size_t(z * bins_per_z);
      r.hist[std::min(bin, cfg.hist_bins - 1)]++;
    }
    double dL, dU;
    st.step(z, a.x, normal(normal_engine), uniform, dL, dU);
    cost += a.cost * cfg.dt;
    L += dL;
    U += dU;
    visit(k + 1, z, L, U, cost);
  }
  const double span = double(n - burn) * cfg.dt;
  r.U = U / span;
  r.L = L / span;
  r.cost = (cost + params.p * U) / span;
  return r;
}

Estimate summarize(const std::vector<double>& xs) {
  Estimate e;
  const double n = double(xs.size());
  for (double x : xs) e.mean += x;
  e.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

std::size_t worker_count(const SimConfig& cfg) {
  std::size_t t = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  return std::clamp<std::size_t>(t, 1, cfg.n_reps);
}

std::vector<RepTotals> run_all(const PolicyTable& table,
                               const ProblemParams& params,
                               const SimConfig& cfg) {
  std::vector<RepTotals> reps(cfg.n_reps);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i; (i = next++) < cfg.n_reps && !failed;) {
      try {
        reps[i] = run_rep(table, params, cfg, i,
                          [](std::uint64_t, double, double, double, double) {});
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  const std::size_t nt = worker_count(cfg);
  if (nt == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return reps;
}

}  // namespace

void check_sim_config(const SimConfig& cfg, const ProblemParams& params) {
  params.check();
  auto bad = [](const std::string& what) {
    fail(ErrorCode::kNonPositiveParameter, what);
  };
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) bad("dt must be positive");
  if (!(cfg.T >= cfg.dt) || !std::isfinite(cfg.T)) bad("T must be at least dt");
  if (cfg.n_reps == 0) bad("n_reps must be positive");
  if (!(cfg.burn_in >= 0.0 && cfg.burn_in <= 0.5))
    bad("burn_in must lie in [0, 0.5]");
  if (!std::isnan(cfg.z0) && !(cfg.z0 >= 0.0 && cfg.z0 <= params.b))
    fail(ErrorCode::kStateOutOfRange, "z0 must lie in [0, b]");
  if (cfg.hist_bins == 0) bad("hist_bins must be positive");
  if (!(cfg.tol_mc >= 0.0)) bad("tol_mc must be nonnegative");
  if (std::llround(cfg.T / cfg.dt) - std::llround(cfg.burn_in * std::llround(cfg.T / cfg.dt)) <= 0)
    bad("no steps left after burn-in");
  const double sd = std::sqrt(params.sigma2 * cfg.dt);
  if (sd > 0.25 * params.b) {
    std::ostringstream os;
    os.precision(6);
    os << "sigma sqrt(dt) = " << sd << " exceeds b / 4 = " << 0.25 * params.b;
    fail(ErrorCode::kStepTooLarge, os.str());
  }
}

SimResult simulate(const CostModel& model, const PolicyProfile& policy,
                   const ProblemParams& params, const SimConfig& cfg) {
  check_sim_config(cfg, params);
  const PolicyTable table(model, policy);
  const std::vector<RepTotals> reps = run_all(table, params, cfg);

  SimResult out;
  out.n_reps = cfg.n_reps;
  out.steps_per_rep = std::uint64_t(std::llround(cfg.T / cfg.dt));
  std::vector<double> cost, U, L;
  std::vector<std::uint64_t> hist(cfg.hist_bins, 0);
  for (const RepTotals& r : reps) {
    cost.push_back(r.cost);
    U.push_back(r.U);
    L.push_back(r.L);
    for (std::size_t i = 0; i < hist.size(); ++i) hist[i] += r.hist[i];
  }
  out.avg_cost = summarize(cost);
  out.drop_rate = summarize(U);
  out.lower_rate = summarize(L);
  std::uint64_t total = 0;
  for (auto h : hist) total += h;
  for (auto h : hist) out.histogram.push_back(double(h) / double(total));
  return out;
}

std::vector<PathSample> simulate_path(const CostModel& model,
                                      const PolicyProfile& policy,
                                      const ProblemParams& params,
                                      const SimConfig& cfg,
                                      std::size_t stride) {
  check_sim_config(cfg, params);
  stride = std::max<std::size_t>(stride, 1);
  const PolicyTable table(model, policy);
  SimConfig one = cfg;
  one.burn_in = 0.0;
  std::vector<PathSample> path;
  const double z0 = std::isnan(cfg.z0) ? 0.5 * params.b : cfg.z0;
  path.push_back({0.0, z0, 0.0, 0.0, 0.0});
  run_rep(table, params, one, 0,
          [&](std::uint64_t k, double z, double L, double U, double cost) {
            if (k % stride == 0)
              path.push_back({double(k) * cfg.dt, z, L, U, cost + params.p * U});
          });
  return path;
}

namespace {

ValidationCheck judge(std::string name, double target, Estimate est,
                      double tol) {
  ValidationCheck c;
  c.name = std::move(name);
  c.target = target;
  c.estimate = est;
  c.allowed = std::max(3.0 * est.se, tol * std::abs(target));
  c.pass = std::abs(est.mean - target) <= c.allowed;
  return c;
}

}  // namespace

ValidationReport validate_solution(const CostModel& model,
                                   const BellmanSolution& sol,
                                   const RejectionReport& rej,
                                   const SimConfig& cfg) {
  ValidationReport r;
  r.sim = simulate(model, PolicyProfile::optimal(sol), sol.params, cfg);
  r.cost = judge("avg_cost", sol.gamma, r.sim.avg_cost, cfg.tol_mc);
  r.drop = judge("drop_rate", rej.beta, r.sim.drop_rate, cfg.tol_mc);
  return r;
}

void require_passed(const ValidationReport& report) {
  for (const ValidationCheck* c : {&report.cost, &report.drop}) {
    if (c->pass) continue;
    std::ostringstream os;
    os.precision(8);
    os << c->name << ": simulated " << c->estimate.mean << " +/- "
       << c->estimate.se << " vs analytic " << c->target << " (allowed "
       << c->allowed << ")";
    fail(ErrorCode::kValidationFailed, os.str());
  }
}

bool Comparison::reference_optimal() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const PolicyCost& e) { return e.reference_wins; });
}

Comparison compare_policies(
    const CostModel& model, const PolicyProfile& reference,
    const std::vector<std::pair<std::string, PolicyProfile>>& alternatives,
    const ProblemParams& params, const SimConfig& cfg) {
  check_sim_config(cfg, params);
  const PolicyTable ref_table(model, reference);
  const std::vector<RepTotals> ref = run_all(ref_table, params, cfg);
  std::vector<double> ref_cost;
  for (const auto& r : ref) ref_cost.push_back(r.cost);
  const Estimate ref_est = summarize(ref_cost);

  Comparison out;
  for (const auto& [name, pol] : alternatives) {
    const PolicyTable table(model, pol);
    const std::vector<RepTotals> alt = run_all(table, params, cfg);
    std::vector<double> cost, U, diff;
    for (std::size_t i = 0; i < alt.size(); ++i) {
      cost.push_back(alt[i].cost);
      U.push_back(alt[i].U);
      diff.push_back(alt[i].cost - ref_cost[i]);
    }
    PolicyCost e;
    e.name = name;
    e.avg_cost = summarize(cost);
    e.drop_rate = summarize(U);
    e.diff = summarize(diff);
    const double pooled = std::hypot(ref_est.se, e.avg_cost.se);
    e.reference_wins = ref_est.mean <= e.avg_cost.mean + 3.0 * pooled;
    out.entries.push_back(std::move(e));
  }
  PolicyCost self;
  self.name = "reference";
  self.avg_cost = ref_est;
  self.drop_rate = summarize([&] {
    std::vector<double> u;
    for (const auto& r : ref) u.push_back(r.U);
    return u;
  }());
  self.reference_wins = true;
  out.entries.insert(out.entries.begin(), std::move(self));
  return out;
}

}  // namespace driftctl
