#pragma once

#include <optional>

#include "bellman.hpp"
#include "rejection.hpp"

namespace driftctl {

/// Drop-rate budget: find the least-energy policy with beta <= beta_hat.
struct ConstraintSpec {
  double beta_hat = 0.0;
};

/// sigma2 and b; the penalty p is what the dual solve determines.
struct SystemParams {
  double sigma2 = 1.0;
  double b = 1.0;
};

struct ConstrainedOptions {
  BellmanOptions bellman;
  std::size_t max_iter = 60;
  /// Relative tolerance on p*.
  double p_tol = 1e-12;
};

struct ConstrainedResult {
  enum class Status { kBinding, kSlack };
  Status status = Status::kBinding;
  double beta_hat = 0.0;
  /// 0 in the slack case.
  double p_star = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  /// Long-run energy cost gamma(p*) - p* beta(p*); 0 in the slack case.
  double energy_cost = 0.0;
  BetaBounds bounds;
  std::size_t evaluations = 0;
  /// The Bellman solution at p*; empty in the slack case, where the policy is
  /// the constant theta_min.
  std::optional<BellmanSolution> solution;
  std::string warning;
};

/// Solves beta(p*) = beta_hat. Throws InfeasibleBudget when beta_hat <= beta_*
/// and BracketingFailed when no sign change is found; beta_hat >= beta* is the
/// slack case and returns the constant least-drift policy.
ConstrainedResult solve_pstar(const CostModel& model, const SystemParams& sys,
                              const ConstraintSpec& spec,
                              const ConstrainedOptions& opts = {});

/// beta(p) under the optimal policy, i.e. one full Bellman + drop-rate pass.
double optimal_beta(const CostModel& model, const ProblemParams& params,
                    const BellmanOptions& opts = {});

struct WirelessSetup {
  CostModel model;
  SystemParams system;
};

/// Exponential energy cost exp{alpha (x - theta_min)} - 1 on
/// [theta_min, inf), buffer b = lambda * d and sigma2 = sigma^2.
WirelessSetup wireless_setup(double lambda, double d, double alpha,
                             double sigma, double theta_min);

}  // namespace driftctl
