#include "constrained.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "numerics.hpp"

namespace driftctl {

double optimal_beta(const CostModel& model, const ProblemParams& params,
                    const BellmanOptions& opts) {
  const BellmanSolution sol = solve_bellman(model, params, opts);
  return beta_of_p(PolicyProfile::optimal(sol), params.sigma2, opts.n_z);
}

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

ConstrainedResult solve_pstar(const CostModel& model, const SystemParams& sys,
                              const ConstraintSpec& spec,
                              const ConstrainedOptions& opts) {
  ProblemParams{sys.sigma2, sys.b, 1.0}.check();
  const double beta_hat = spec.beta_hat;
  if (!(beta_hat > 0.0) || !std::isfinite(beta_hat))
    fail(ErrorCode::kNonPositiveParameter, "beta_hat must be positive and finite");

  ConstrainedResult out;
  out.beta_hat = beta_hat;
  out.bounds = beta_bounds(model, sys.sigma2, sys.b);

  if (beta_hat <= out.bounds.lower)
    fail(ErrorCode::kInfeasibleBudget,
         "beta_hat = " + num(beta_hat) +
             " is not above the drop rate under maximal drift " +
             num(out.bounds.lower));
  if (beta_hat >= out.bounds.upper) {
    out.status = ConstrainedResult::Status::kSlack;
    out.beta = out.bounds.upper;
    out.gamma = 0.0;
    out.energy_cost = 0.0;
    out.warning = "budget is slack: beta_hat = " + num(beta_hat) +
                  " >= drop rate " + num(out.bounds.upper) +
                  " under the least drift; no control effort needed";
    return out;
  }

  std::map<double, double> cache;
  auto excess = [&](double p) {
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;
    ++out.evaluations;
    const double r =
        optimal_beta(model, {sys.sigma2, sys.b, p}, opts.bellman) - beta_hat;
    cache.emplace(p, r);
    return r;
  };

  const double p0 = model.p_zero();
  double lo = std::isfinite(p0) ? std::max(p0, 1e-3) : 1e-3;
  double f_lo = excess(lo);
  while (f_lo <= 0.0) {
    if (lo < 1e-12)
      fail(ErrorCode::kBracketingFailed,
           "no penalty small enough keeps beta above beta_hat");
    lo *= 0.1;
    f_lo = excess(lo);
  }
  double hi = 2.0 * lo;
  double f_hi = excess(hi);
  while (f_hi > 0.0) {
    if (hi > 1e12)
      fail(ErrorCode::kBracketingFailed,
           "beta(p) stays above beta_hat up to p = " + num(hi));
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = excess(hi);
  }

  const double p_star = numerics::find_root(excess, lo, hi, f_lo, f_hi,
                                            opts.p_tol, opts.max_iter);
  BellmanSolution sol = solve_bellman(model, {sys.sigma2, sys.b, p_star},
                                      opts.bellman);
  out.p_star = p_star;
  out.gamma = sol.gamma;
  out.beta = beta_of_p(PolicyProfile::optimal(sol), sys.sigma2,
                       opts.bellman.n_z);
  out.energy_cost = out.gamma - p_star * out.beta;
  out.solution = std::move(sol);
  return out;
}

WirelessSetup wireless_setup(double lambda, double d, double alpha,
                             double sigma, double theta_min) {
  for (auto [name, x] : {std::pair{"lambda", lambda}, std::pair{"d", d},
                         std::pair{"alpha", alpha}, std::pair{"sigma", sigma}})
    if (!(x > 0.0) || !std::isfinite(x))
      fail(ErrorCode::kNonPositiveParameter,
           std::string(name) + " must be positive and finite");
  if (!std::isfinite(theta_min))
    fail(ErrorCode::kNonPositiveParameter, "theta_min must be finite");
  CostModel model = CostModel::validate(
      ActionSet::interval(theta_min, numerics::kInf),
      CostSpec{{cost::Exponential{alpha}}});
  return {std::move(model), {sigma * sigma, lambda * d}};
}

}  // namespace driftctl
