#pragma once

#include <optional>
#include <string>

#include "constrained.hpp"
#include "cost_model.hpp"
#include "simulator.hpp"

namespace driftctl {

/// Exponential-cost shortcut: builds the model, sigma2 and b from link-level
/// quantities.
struct WirelessSpec {
  double lambda = 0.0;
  double d = 0.0;
  double alpha = 0.0;
  double sigma = 0.0;
  double theta_min = 0.0;
};

/// Contents of a run configuration file. Everything is optional at parse
/// time; the accessors below enforce what a particular command needs.
struct RunConfig {
  std::optional<ActionSet> actions;
  std::optional<CostSpec> cost;
  std::optional<WirelessSpec> wireless;
  std::optional<double> sigma2, b, p, beta_hat;
  std::optional<std::size_t> n_z;
  bool has_sim = false;
  SimConfig sim;
  std::size_t dump_stride = 100;
  std::string out_dir = ".";

  /// Validated model from the model or wireless block.
  CostModel model() const;
  /// sigma2 and b; throws ParseError when either is missing.
  SystemParams system() const;
  /// sigma2, b and p; throws ParseError when p is missing.
  ProblemParams problem() const;
  BellmanOptions bellman_options() const;
};

/// Throws Error(ParseError) with "line N: ..." context.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace driftctl
