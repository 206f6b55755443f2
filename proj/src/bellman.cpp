#include "bellman.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace driftctl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

// Smallest y strictly past a stored breakpoint where the right-hand branch of
// psi is already selected.
double past_break(double y) { return y + 8.0 * kEps * std::abs(y); }

}  // namespace

void ProblemParams::check() const {
  auto bad = [](double x) { return !(std::isfinite(x) && x > 0.0); };
  if (bad(sigma2) || bad(b) || bad(p))
    fail(ErrorCode::kNonPositiveParameter,
         "sigma2, b and p must be finite and > 0 (got sigma2=" + fmt(sigma2) +
             ", b=" + fmt(b) + ", p=" + fmt(p) + ")");
}

double F(const CostModel& model, double gamma, double p, double rel_tol) {
  const double lower = model.phi_star(p);
  if (!(gamma > lower))
    fail(ErrorCode::kGammaOutOfRange,
         "gamma = " + fmt(gamma) + " must exceed phi_star(p) = " + fmt(lower));
  return numerics::integrate_split(
      [&](double u) { return 1.0 / (model.phi(u) + gamma); }, 0.0, p,
      model.psi_breakpoints(), rel_tol);
}

double solve_gamma(const CostModel& model, const ProblemParams& params,
                   const BellmanOptions& opts) {
  params.check();
  const double target = 2.0 * params.b / params.sigma2;
  const double floor = model.phi_star(params.p);
  const double scale = std::max(1.0, floor);
  auto Fp = [&](double g) { return F(model, g, params.p, opts.quad_tol); };

  // F blows up as gamma approaches phi_star(p) from above and vanishes as
  // gamma grows, so both searches terminate for well-scaled inputs.
  double delta = scale;
  double lo = floor + delta;
  double f_lo = Fp(lo);
  while (f_lo <= target) {
    delta *= 0.1;
    if (delta < 1e-14 * scale)
      fail(ErrorCode::kBracketingFailed,
           "no lower bracket for gamma above phi_star(p) = " + fmt(floor));
    lo = floor + delta;
    f_lo = Fp(lo);
  }
  double hi = std::max(1.0, floor + 1.0);
  double f_hi = Fp(hi);
  while (f_hi >= target) {
    hi *= 2.0;
    if (!std::isfinite(hi) || hi > 1e300)
      fail(ErrorCode::kBracketingFailed, "no upper bracket for gamma");
    f_hi = Fp(hi);
  }
  if (hi < lo) std::swap(lo, hi), std::swap(f_lo, f_hi);
  const double tol = std::min(opts.root_tol, 1e-13);
  return numerics::find_root([&](double g) { return Fp(g) - target; }, lo, hi,
                             f_lo - target, f_hi - target, tol);
}

MarginalValue::MarginalValue(const CostModel& model,
                             const ProblemParams& params, double gamma,
                             const BellmanOptions& opts)
    : model_(model), params_(params), gamma_(gamma) {
  params_.check();
  if (opts.n_z < 3)
    fail(ErrorCode::kNonPositiveParameter, "n_z must be at least 3");
  const double p = params_.p;
  const double s = 0.5 * params_.sigma2;
  auto integrand = [this](double u) { return 1.0 / (model_.phi(u) + gamma_); };

  // v-nodes: uniform, geometric near 0, and every psi breakpoint below p.
  struct Node {
    double v;
    bool is_break;
  };
  const std::size_t m = std::max<std::size_t>(4 * (opts.n_z - 1), 256);
  std::vector<Node> nodes;
  nodes.reserve(m + 64);
  for (std::size_t j = 0; j <= m; ++j)
    nodes.push_back({p * double(j) / double(m), false});
  for (double g = p / double(m) / 2.0; g > p * 1e-12; g /= 2.0)
    nodes.push_back({g, false});
  for (double y : model_.psi_breakpoints())
    if (y > 0.0 && y < p) nodes.push_back({y, true});
  std::sort(nodes.begin(), nodes.end(),
            [](const Node& a, const Node& b) { return a.v < b.v; });
  std::vector<Node> kept;
  kept.reserve(nodes.size());
  const double min_gap = 1e-13 * p;
  for (const Node& n : nodes) {
    if (!kept.empty() && n.v - kept.back().v < min_gap) {
      // Keep breakpoints over plain nodes, never displace the end points.
      if (n.is_break && !kept.back().is_break && kept.size() > 1 && n.v < p)
        kept.back() = n;
      continue;
    }
    kept.push_back(n);
  }
  if (kept.back().v != p) {
    if (p - kept.back().v < min_gap) kept.back() = {p, false};
    else kept.push_back({p, false});
  }

  g_nodes_v_.resize(kept.size());
  g_nodes_G_.resize(kept.size());
  g_nodes_v_[0] = 0.0;
  g_nodes_G_[0] = 0.0;
  for (std::size_t j = 1; j < kept.size(); ++j) {
    g_nodes_v_[j] = kept[j].v;
    g_nodes_G_[j] = g_nodes_G_[j - 1] +
                    s * numerics::integrate(integrand, kept[j - 1].v,
                                            kept[j].v, opts.quad_tol);
    if (kept[j].is_break) {
      v_breaks_.push_back(kept[j].v);
      z_breaks_.push_back(g_nodes_G_[j]);
    }
  }
  g_inverse_ = numerics::MonotoneTable(g_nodes_G_, g_nodes_v_);

  // Uniform z-grid; v by exact inversion seeded from the monotone inverse.
  const std::size_t n = opts.n_z;
  z_.resize(n);
  v_.resize(n);
  for (std::size_t i = 0; i < n; ++i) z_[i] = params_.b * double(i) / double(n - 1);
  z_.back() = params_.b;
  v_.front() = 0.0;
  v_.back() = p;
  for (std::size_t i = 1; i + 1 < n; ++i) v_[i] = invert(z_[i], g_inverse_(z_[i]));
  interp_ = numerics::MonotoneTable(z_, v_, (model_.phi(0.0) + gamma_) / s,
                                    (model_.phi(p) + gamma_) / s);

  // Independent cross-check: shoot v' = (2/sigma2)(phi(v) + gamma) from v(0) = 0.
  const double lip = std::max(std::abs(model_.theta_min()), std::abs(model_.psi(p))) / s;
  const std::size_t steps = std::clamp<std::size_t>(
      std::size_t(std::ceil(20.0 * lip * params_.b)), 8192, 2'000'000);
  const double h = params_.b / double(steps);
  auto rhs = [&](double v) { return (model_.phi(v) + gamma_) / s; };
  double v = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double k1 = rhs(v);
    const double k2 = rhs(v + 0.5 * h * k1);
    const double k3 = rhs(v + 0.5 * h * k2);
    const double k4 = rhs(v + h * k3);
    v += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
  }
  shoot_mismatch_ = std::abs(v - p);
  if (shoot_mismatch_ > opts.bvp_tol * p)
    fail(ErrorCode::kEndpointMismatch,
         "shooting gives v(b) = " + fmt(v) + ", expected p = " + fmt(p));
}

double MarginalValue::G(double v) const {
  v = std::clamp(v, 0.0, params_.p);
  const std::size_t j = numerics::locate(g_nodes_v_, v);
  const double s = 0.5 * params_.sigma2;
  return g_nodes_G_[j] +
         s * numerics::gauss20(
                 [this](double u) { return 1.0 / (model_.phi(u) + gamma_); },
                 g_nodes_v_[j], v);
}

double MarginalValue::exact(double z) const { return invert(z, g_inverse_(z)); }

double MarginalValue::invert(double z, double guess) const {
  if (z <= 0.0) return 0.0;
  if (z >= g_nodes_G_.back()) return params_.p;
  const std::size_t j = numerics::locate(g_nodes_G_, z);
  const double s = 0.5 * params_.sigma2;
  const double v0 = g_nodes_v_[j];
  const double g0 = g_nodes_G_[j];
  auto integrand = [this](double u) { return 1.0 / (model_.phi(u) + gamma_); };
  double lo = v0;
  double hi = g_nodes_v_[j + 1];
  double x = std::clamp(guess, lo, hi);
  // Safeguarded Newton; the segment holds no breakpoint so the integrand is
  // smooth on it.
  for (int it = 0; it < 60; ++it) {
    const double r = g0 + s * numerics::gauss20(integrand, v0, x) - z;
    if (r == 0.0) return x;
    if (r > 0.0) hi = x; else lo = x;
    double next = x - r / (s * integrand(x));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 2.0 * kEps * std::abs(x) || hi - lo <= 2.0 * kEps * hi) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

Action OptimalPolicy::operator()(double z) const {
  const MarginalValue& mv = *v_;
  const double b = mv.params().b;
  z = std::clamp(z, 0.0, b);
  double v = mv.interpolated(z);
  // Keep v on the same side of each psi breakpoint as z is of its image, so
  // the policy is left-continuous exactly at the break.
  const auto& zb = mv.z_breaks();
  const auto& vb = mv.v_breaks();
  const std::size_t k =
      std::size_t(std::lower_bound(zb.begin(), zb.end(), z) - zb.begin());
  const double lo = k > 0 ? past_break(vb[k - 1]) : 0.0;
  const double hi = k < vb.size() ? vb[k] : mv.params().p;
  v = std::clamp(v, std::min(lo, hi), hi);
  return mv.model().best_response(v);
}

std::vector<double> relative_value(const MarginalValue& mv) {
  const auto& v = mv.v();
  const double s = 0.5 * mv.params().sigma2;
  const CostModel& model = mv.model();
  const double gamma = mv.gamma();
  // f' = v; substitute u = v(y), dy = s du / (phi(u) + gamma).
  auto integrand = [&](double u) { return u / (model.phi(u) + gamma); };
  std::vector<double> f(v.size(), 0.0);
  for (std::size_t i = 1; i < v.size(); ++i)
    f[i] = f[i - 1] + s * numerics::integrate_split(integrand, v[i - 1], v[i],
                                                    model.psi_breakpoints(),
                                                    1e-12);
  return f;
}

double bellman_residual(const MarginalValue& mv) {
  const auto& z = mv.z();
  const auto& v = mv.v();
  const double b = mv.params().b;
  const double s = 0.5 * mv.params().sigma2;
  const double h = std::min(1e-4 * b, 0.125 * (z[1] - z[0]));
  const auto& zb = mv.z_breaks();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < z.size(); ++i) {
    const bool near_break = std::any_of(zb.begin(), zb.end(), [&](double q) {
      return std::abs(q - z[i]) <= 3.0 * h;
    });
    if (near_break) continue;
    // five-point stencil
    const double dv = (8.0 * (mv.exact(z[i] + h) - mv.exact(z[i] - h)) -
                       (mv.exact(z[i] + 2.0 * h) - mv.exact(z[i] - 2.0 * h))) /
                      (12.0 * h);
    const double r = std::abs(s * dv - mv.model().phi(v[i]) - mv.gamma());
    worst = std::max(worst, r);
  }
  return worst;
}

BellmanSolution solve_bellman(const CostModel& model,
                              const ProblemParams& params,
                              const BellmanOptions& opts) {
  BellmanSolution sol;
  sol.params = params;
  sol.gamma = solve_gamma(model, params, opts);
  sol.v = std::make_shared<const MarginalValue>(model, params, sol.gamma, opts);
  sol.f = relative_value(*sol.v);
  const OptimalPolicy pol = sol.policy();
  sol.theta.reserve(sol.z().size());
  for (double z : sol.z()) sol.theta.push_back(pol.theta(z));
  sol.residual_max = bellman_residual(*sol.v);
  if (!(sol.residual_max <= opts.residual_tol))
    fail(ErrorCode::kResidualTooLarge,
         "Bellman residual " + fmt(sol.residual_max) + " exceeds " +
             fmt(opts.residual_tol));
  return sol;
}

double policy(const BellmanSolution& sol, double z) {
  const double b = sol.params.b;
  if (!(z >= 0.0 && z <= b))
    fail(ErrorCode::kStateOutOfRange,
         "z = " + fmt(z) + " is outside [0, " + fmt(b) + "]");
  return sol.policy().theta(z);
}

}  // namespace driftctl
