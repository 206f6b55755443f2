#include "rejection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "numerics.hpp"

namespace driftctl {

PolicyProfile PolicyProfile::constant(double theta0, double b) {
  return {[theta0](double) { return theta0; }, b, {}};
}

PolicyProfile PolicyProfile::optimal(const BellmanSolution& sol) {
  OptimalPolicy pol = sol.policy();
  return {[pol](double z) { return pol.theta(z); }, sol.params.b,
          pol.breaks()};
}

DriftIntegral::DriftIntegral(const PolicyProfile& policy, double sigma2,
                             std::size_t n_z)
    : policy_(&policy), sigma2_(sigma2) {
  const double b = policy.b;
  n_z = std::max<std::size_t>(n_z, 2);
  nodes_.reserve(n_z + policy.breaks.size());
  for (std::size_t i = 0; i < n_z; ++i)
    nodes_.push_back(b * double(i) / double(n_z - 1));
  nodes_.back() = b;
  for (double q : policy.breaks)
    if (q > 0.0 && q < b) nodes_.push_back(q);
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

  cum_I_.assign(nodes_.size(), 0.0);
  cum_log_D_.assign(nodes_.size(), -numerics::kInf);
  for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
    cum_I_[k + 1] = cum_I_[k] + local_I(k, nodes_[k + 1]);
    cum_log_D_[k + 1] =
        numerics::log_add_exp(cum_log_D_[k], local_log_D(k, nodes_[k + 1]));
  }
}

// Integral of theta over [nodes_[k], z]; theta is smooth inside a cell.
double DriftIntegral::local_I(std::size_t k, double z) const {
  return numerics::gauss10(policy_->theta, nodes_[k], z);
}

// log of int_{nodes_[k]}^z exp(-2 I(y) / sigma2) dy, factored around the cell
// start so the exponent stays moderate.
double DriftIntegral::local_log_D(std::size_t k, double z) const {
  const double a = nodes_[k];
  if (z <= a) return -numerics::kInf;
  const double rate = 2.0 / sigma2_;
  const double inner = numerics::gauss10(
      [&](double y) { return std::exp(-rate * local_I(k, y)); }, a, z);
  return -rate * cum_I_[k] + std::log(inner);
}

double DriftIntegral::I(double z) const {
  z = std::clamp(z, 0.0, policy_->b);
  const std::size_t k = numerics::locate(nodes_, z);
  return cum_I_[k] + local_I(k, z);
}

double DriftIntegral::log_D(double z) const {
  z = std::clamp(z, 0.0, policy_->b);
  const std::size_t k = numerics::locate(nodes_, z);
  return numerics::log_add_exp(cum_log_D_[k], local_log_D(k, z));
}

double DriftIntegral::beta() const {
  const double rate = 2.0 / sigma2_;
  return 0.5 * sigma2_ * std::exp(-rate * cum_I_.back() - cum_log_D_.back());
}

double DriftIntegral::u(double z) const {
  if (z <= 0.0) return 0.0;
  if (z >= policy_->b) return 1.0;
  const double rate = 2.0 / sigma2_;
  return std::exp(rate * (I(z) - cum_I_.back()) + log_D(z) - cum_log_D_.back());
}

double beta_of_p(const PolicyProfile& policy, double sigma2, std::size_t n_z) {
  return DriftIntegral(policy, sigma2, n_z).beta();
}

double beta_constant(double theta0, double sigma2, double b) {
  const double k = 2.0 * theta0 * b / sigma2;
  double ratio;  // k / (e^k - 1)
  if (std::abs(k) < 1e-8)
    ratio = 1.0 - 0.5 * k + k * k / 12.0;
  else
    ratio = k / std::expm1(k);
  return sigma2 / (2.0 * b) * ratio;
}

double beta_from_conjugate(const CostModel& model, const ProblemParams& params,
                           double gamma) {
  const double p = params.p;
  const double denom = numerics::integrate_split(
      [&](double u) {
        const double w = model.phi(u) + gamma;
        return 1.0 / (w * w);
      },
      0.0, p, model.psi_breakpoints(), 1e-12);
  return 1.0 / ((model.phi(p) + gamma) * denom);
}

UTable u_of_z(const PolicyProfile& policy, double sigma2, std::size_t n_z) {
  const DriftIntegral di(policy, sigma2, n_z);
  const double beta = di.beta();
  const double b = policy.b;
  UTable out;
  out.z.resize(n_z);
  out.u.resize(n_z);
  for (std::size_t i = 0; i < n_z; ++i) {
    out.z[i] = b * double(i) / double(n_z - 1);
    out.u[i] = di.u(out.z[i]);
  }
  out.z.back() = b;
  out.u.front() = 0.0;
  out.u.back() = 1.0;

  const double h = std::min(1e-4 * b, 0.125 * b / double(n_z - 1));
  for (std::size_t i = 1; i + 1 < n_z; ++i) {
    const double z = out.z[i];
    const bool near_break =
        std::any_of(policy.breaks.begin(), policy.breaks.end(),
                    [&](double q) { return std::abs(q - z) <= 3.0 * h; });
    if (near_break) continue;
    const double du = (8.0 * (di.u(z + h) - di.u(z - h)) -
                       (di.u(z + 2.0 * h) - di.u(z - 2.0 * h))) /
                      (12.0 * h);
    const double r =
        std::abs(0.5 * sigma2 * du - policy.theta(z) * out.u[i] - beta);
    out.residual_max = std::max(out.residual_max, r);
  }
  return out;
}

BetaBounds beta_bounds(const CostModel& model, double sigma2, double b) {
  BetaBounds out;
  out.upper = beta_constant(model.theta_min(), sigma2, b);
  out.lower = model.bounded() ? beta_constant(model.theta_max(), sigma2, b) : 0.0;
  return out;
}

double check_duality_gap(double gamma, double beta, double p, double tol) {
  const double gap = gamma - p * beta;
  if (gap < -tol) {
    std::ostringstream os;
    os.precision(12);
    os << "gamma - p beta = " << gap << " is negative";
    fail(ErrorCode::kDualityViolation, os.str());
  }
  return gap;
}

RejectionReport analyze_rejection(const CostModel& model,
                                  const BellmanSolution& sol, double tol) {
  RejectionReport r;
  const PolicyProfile profile = PolicyProfile::optimal(sol);
  const std::size_t n_z = sol.z().size();
  r.u = u_of_z(profile, sol.params.sigma2, n_z);
  if (!(r.u.residual_max <= tol)) {
    std::ostringstream os;
    os.precision(6);
    os << "residual of the u equation " << r.u.residual_max << " exceeds " << tol;
    fail(ErrorCode::kResidualTooLarge, os.str());
  }
  r.beta = beta_of_p(profile, sol.params.sigma2, n_z);
  const BetaBounds bb = beta_bounds(model, sol.params.sigma2, sol.params.b);
  r.beta_upper = bb.upper;
  r.beta_lower = bb.lower;
  r.p0 = model.p_zero();
  r.gap = check_duality_gap(sol.gamma, r.beta, sol.params.p, tol);
  return r;
}

}  // namespace driftctl
