#pragma once

#include <functional>
#include <vector>

#include "bellman.hpp"

namespace driftctl {

/// A stationary policy on [0, b] in the form the drop-rate formulas need: the
/// drift function plus the points where it may jump or kink.
struct PolicyProfile {
  std::function<double(double)> theta;
  double b = 1.0;
  std::vector<double> breaks;

  static PolicyProfile constant(double theta0, double b);
  static PolicyProfile optimal(const BellmanSolution& sol);
};

/// Cumulative drift integral I(y) = int_0^y theta(s) ds and, in log space,
/// D(y) = int_0^y exp(-2 I(s) / sigma2) ds, tabulated on a uniform grid
/// refined at the policy's breaks.
class DriftIntegral {
 public:
  DriftIntegral(const PolicyProfile& policy, double sigma2,
                std::size_t n_z = 1025);

  double I(double z) const;
  double log_D(double z) const;
  /// Long-run rate of pushing at the upper boundary.
  double beta() const;
  /// Solution u(z) of (sigma2/2) u' - theta u - beta = 0, u(0) = 0, u(b) = 1.
  double u(double z) const;

 private:
  const PolicyProfile* policy_;
  double sigma2_;
  std::vector<double> nodes_;
  std::vector<double> cum_I_;
  std::vector<double> cum_log_D_;

  double local_I(std::size_t k, double z) const;
  double local_log_D(std::size_t k, double z) const;
};

double beta_of_p(const PolicyProfile& policy, double sigma2,
                 std::size_t n_z = 1025);

/// Drop rate under the constant drift theta0: theta0 / (exp(2 theta0 b / sigma2) - 1),
/// with its limit sigma2 / (2 b) at theta0 = 0.
double beta_constant(double theta0, double sigma2, double b);

/// Same quantity as beta_of_p on the optimal policy, but computed in the
/// marginal-value coordinate: 1 / ((phi(p) + gamma) int_0^p du / (phi(u) + gamma)^2).
double beta_from_conjugate(const CostModel& model, const ProblemParams& params,
                           double gamma);

struct UTable {
  std::vector<double> z;
  std::vector<double> u;
  double residual_max = 0.0;
};

UTable u_of_z(const PolicyProfile& policy, double sigma2,
              std::size_t n_z = 1025);

struct BetaBounds {
  /// beta*: drop rate under the constant least drift.
  double upper = 0.0;
  /// beta_*: drop rate under the constant greatest drift, 0 if A is unbounded.
  double lower = 0.0;
};

BetaBounds beta_bounds(const CostModel& model, double sigma2, double b);

/// gamma - p beta, the long-run average energy cost of the optimal policy.
/// Throws DualityViolation when it is below -tol.
double check_duality_gap(double gamma, double beta, double p,
                         double tol = 1e-6);

struct RejectionReport {
  double beta = 0.0;
  UTable u;
  double beta_upper = 0.0;
  double beta_lower = 0.0;
  double p0 = 0.0;
  double gap = 0.0;
};

/// beta, u, the bounds, p0 and the gap. Throws ResidualTooLarge when the u
/// equation residual exceeds tol.
RejectionReport analyze_rejection(const CostModel& model,
                                  const BellmanSolution& sol,
                                  double tol = 1e-6);

}  // namespace driftctl
