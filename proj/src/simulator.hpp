#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bellman.hpp"
#include "rejection.hpp"

namespace driftctl {

enum class ReflectionScheme {
  /// Per-step boundary crossing sampled from the Brownian bridge extremes.
  kBridge,
  /// Plain two-sided projection of the Euler step.
  kProjection,
};

struct SimConfig {
  double dt = 1e-3;
  double T = 1e4;
  std::size_t n_reps = 64;
  std::uint64_t seed = 1;
  /// Fraction of the horizon discarded before averaging.
  double burn_in = 0.1;
  /// Initial state; NaN means b / 2.
  double z0 = std::numeric_limits<double>::quiet_NaN();
  ReflectionScheme scheme = ReflectionScheme::kBridge;
  /// Relative tolerance for validate_solution.
  double tol_mc = 0.02;
  std::size_t hist_bins = 50;
  /// 0 uses every hardware thread.
  std::size_t threads = 0;
};

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

struct SimResult {
  Estimate avg_cost;
  Estimate drop_rate;
  Estimate lower_rate;
  /// Fraction of post-burn-in steps spent in each of hist_bins equal bins.
  std::vector<double> histogram;
  std::size_t n_reps = 0;
  std::uint64_t steps_per_rep = 0;
};

/// Throws NonPositiveParameter / StepTooLarge on a bad configuration.
void check_sim_config(const SimConfig& cfg, const ProblemParams& params);

/// Runs cfg.n_reps independent replications of the controlled reflected
/// diffusion under `policy`. Costs are charged with c from `model`; a policy
/// value outside A raises InadmissiblePolicy.
SimResult simulate(const CostModel& model, const PolicyProfile& policy,
                   const ProblemParams& params, const SimConfig& cfg);

struct PathSample {
  double t, z, L, U, xi;
};

/// One replication (index 0 of cfg.seed), recorded every `stride` steps.
std::vector<PathSample> simulate_path(const CostModel& model,
                                      const PolicyProfile& policy,
                                      const ProblemParams& params,
                                      const SimConfig& cfg,
                                      std::size_t stride);

struct ValidationCheck {
  std::string name;
  double target = 0.0;
  Estimate estimate;
  double allowed = 0.0;
  bool pass = false;
};

struct ValidationReport {
  SimResult sim;
  ValidationCheck cost;
  ValidationCheck drop;
  bool passed() const { return cost.pass && drop.pass; }
};

/// Simulates the optimal policy and compares against gamma and beta within
/// max(3 SE, tol_mc * target).
ValidationReport validate_solution(const CostModel& model,
                                   const BellmanSolution& sol,
                                   const RejectionReport& rej,
                                   const SimConfig& cfg);

/// Throws ValidationFailed naming the failing statistic.
void require_passed(const ValidationReport& report);

struct PolicyCost {
  std::string name;
  Estimate avg_cost;
  Estimate drop_rate;
  /// Mean and SE of (this cost - reference cost) over common replications.
  Estimate diff;
  bool reference_wins = false;
};

struct Comparison {
  std::vector<PolicyCost> entries;
  bool reference_optimal() const;
};

/// Simulates the reference policy and each alternative on common random
/// numbers. An alternative wins only if the reference cost exceeds its cost
/// by more than 3 pooled SE.
Comparison compare_policies(const CostModel& model,
                            const PolicyProfile& reference,
                            const std::vector<std::pair<std::string, PolicyProfile>>&
                                alternatives,
                            const ProblemParams& params, const SimConfig& cfg);

}  // namespace driftctl
