#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "cost_model.hpp"
#include "numerics.hpp"

namespace driftctl {

/// sigma2: variance of the driving Brownian motion; b: buffer size; p: penalty
/// per unit of pushing at the upper boundary.
struct ProblemParams {
  double sigma2 = 1.0;
  double b = 1.0;
  double p = 1.0;

  /// Throws NonPositiveParameter unless all three are finite and > 0.
  void check() const;
};

struct BellmanOptions {
  std::size_t n_z = 1025;
  double quad_tol = 1e-10;
  double root_tol = 1e-10;
  double residual_tol = 1e-6;
  /// Relative (to p) tolerance on the shooting cross-check v_ODE(b) = p.
  double bvp_tol = 1e-6;
};

/// Integral of 1 / (phi(u) + gamma) over [0, p]. Throws GammaOutOfRange unless
/// gamma > phi_star(p).
double F(const CostModel& model, double gamma, double p, double rel_tol = 1e-10);

/// The unique gamma with (sigma2 / 2) F(gamma, p) = b.
double solve_gamma(const CostModel& model, const ProblemParams& params,
                   const BellmanOptions& opts = {});

/// Marginal value v(., p) on a uniform z-grid, obtained by inverting
/// G(v) = (sigma2 / 2) int_0^v du / (phi(u) + gamma).
class MarginalValue {
 public:
  MarginalValue(const CostModel& model, const ProblemParams& params,
                double gamma, const BellmanOptions& opts = {});

  const CostModel& model() const { return model_; }
  const std::vector<double>& z() const { return z_; }
  const std::vector<double>& v() const { return v_; }
  double gamma() const { return gamma_; }
  const ProblemParams& params() const { return params_; }

  /// G(v) for v in [0, p].
  double G(double v) const;
  /// v(z) by exact inversion of G (quadrature + safeguarded Newton).
  double exact(double z) const;
  /// v(z) by monotone cubic interpolation of the table.
  double interpolated(double z) const { return interp_(z); }

  /// z-locations (ascending, inside (0, b)) where v crosses a breakpoint of
  /// psi; the policy jumps or kinks there.
  const std::vector<double>& z_breaks() const { return z_breaks_; }
  /// The psi breakpoints that z_breaks() map from.
  const std::vector<double>& v_breaks() const { return v_breaks_; }

  /// |v_ODE(b) - p| from a fixed-step RK4 shot of v' = (2/sigma2)(phi(v)+gamma).
  double shooting_mismatch() const { return shoot_mismatch_; }

 private:
  CostModel model_;
  ProblemParams params_;
  double gamma_;
  std::vector<double> g_nodes_v_, g_nodes_G_;
  std::vector<double> z_, v_;
  std::vector<double> z_breaks_, v_breaks_;
  numerics::MonotoneTable interp_;
  numerics::MonotoneTable g_inverse_;
  double shoot_mismatch_ = 0.0;

  double invert(double z, double guess) const;
};

/// The optimal policy theta(z, p) = psi(v(z, p)), nondecreasing and
/// left-continuous in z.
class OptimalPolicy {
 public:
  explicit OptimalPolicy(std::shared_ptr<const MarginalValue> v)
      : v_(std::move(v)) {}

  /// Action and its cost rate at state z (clamped to [0, b]).
  Action operator()(double z) const;
  double theta(double z) const { return (*this)(z).x; }
  double b() const { return v_->params().b; }
  const std::vector<double>& breaks() const { return v_->z_breaks(); }

 private:
  std::shared_ptr<const MarginalValue> v_;
};

/// f(z) = int_0^z v(y) dy on the v-table grid.
std::vector<double> relative_value(const MarginalValue& v);

/// max over interior grid points of |(sigma2/2) v'(z) - phi(v(z)) - gamma|,
/// with v' from centered differences of the exact marginal value.
double bellman_residual(const MarginalValue& v);

struct BellmanSolution {
  ProblemParams params;
  double gamma = 0.0;
  std::shared_ptr<const MarginalValue> v;
  std::vector<double> f;
  std::vector<double> theta;
  double residual_max = 0.0;

  const std::vector<double>& z() const { return v->z(); }
  OptimalPolicy policy() const { return OptimalPolicy(v); }
};

/// gamma, v, f, theta and the residual in one pass. Throws EndpointMismatch if
/// the shooting cross-check disagrees with v(b) = p beyond opts.bvp_tol * p,
/// ResidualTooLarge if the residual exceeds opts.residual_tol.
BellmanSolution solve_bellman(const CostModel& model,
                              const ProblemParams& params,
                              const BellmanOptions& opts = {});

/// theta(z, p); throws StateOutOfRange for z outside [0, b].
double policy(const BellmanSolution& sol, double z);

}  // namespace driftctl
