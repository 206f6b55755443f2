#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace driftctl {

/// Absolute tolerance for the normalization and membership checks.
inline constexpr double kValueTol = 1e-9;
inline constexpr double kMembershipTol = 1e-9;
/// Relative tolerance under which two argmax candidates count as tied.
inline constexpr double kTieTol = 1e-12;
/// Relative agreement required between the closed-form conjugate and the
/// running integral of the smallest maximizer.
inline constexpr double kIntegralTol = 1e-8;

/// A closed interval [lo, hi]; lo == hi is an isolated point and hi may be
/// +infinity for the last piece of an unbounded set.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool is_point() const { return lo == hi; }
  bool unbounded() const { return hi == std::numeric_limits<double>::infinity(); }
};

/// The set of available negative drift rates: disjoint closed pieces sorted
/// ascending. Construction does not validate; CostModel::check does.
class ActionSet {
 public:
  ActionSet() = default;
  explicit ActionSet(std::vector<Interval> pieces) : pieces_(std::move(pieces)) {}

  static ActionSet singleton(double x) { return ActionSet({{x, x}}); }
  static ActionSet interval(double lo, double hi) { return ActionSet({{lo, hi}}); }

  const std::vector<Interval>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  double least() const { return pieces_.front().lo; }
  double supremum() const { return pieces_.back().hi; }
  bool bounded() const { return !pieces_.back().unbounded(); }

  /// Membership within an absolute tolerance.
  bool contains(double x, double tol = kMembershipTol) const;

 private:
  std::vector<Interval> pieces_;
};

namespace cost {

/// slope * x + intercept
struct Linear {
  double slope = 0.0;
  double intercept = 0.0;
};

/// coeff * (x - shift)^exponent + offset; shift defaults to the piece's lo.
struct Power {
  double coeff = 1.0;
  double exponent = 2.0;
  double shift = std::numeric_limits<double>::quiet_NaN();
  double offset = 0.0;
};

/// scale * exp(alpha * (x - shift)) + offset; shift defaults to the piece's lo
/// and offset to -scale, which gives exp{alpha (x - lo)} - 1.
struct Exponential {
  double alpha = 1.0;
  double shift = std::numeric_limits<double>::quiet_NaN();
  double scale = 1.0;
  double offset = std::numeric_limits<double>::quiet_NaN();
};

/// Sampled cost with piecewise-linear interpolation between knots. Knots must
/// span the piece exactly.
struct Table {
  std::vector<double> x;
  std::vector<double> y;
};

}  // namespace cost

using PieceCost =
    std::variant<cost::Linear, cost::Power, cost::Exponential, cost::Table>;

/// One cost description per ActionSet piece, in the same order.
struct CostSpec {
  std::vector<PieceCost> pieces;
};

struct ModelIssue {
  ErrorCode code;
  std::string message;
};

struct ModelCheck {
  std::vector<ModelIssue> issues;
  /// Human-readable classification of the growth condition outcome.
  std::string growth;

  bool ok() const { return issues.empty(); }
};

/// An action together with its cost rate.
struct Action {
  double x = 0.0;
  double cost = 0.0;
};

/// A validated (action set, cost) pair together with the conjugate pair
/// phi/psi it induces. Immutable after construction.
class CostModel {
 public:
  /// Lists every violated assumption without throwing.
  static ModelCheck check(const ActionSet& actions, const CostSpec& cost);

  /// Throws Error carrying the first violated assumption's code; the message
  /// lists all of them.
  static CostModel validate(ActionSet actions, CostSpec cost);

  const ActionSet& actions() const { return actions_; }
  const CostSpec& cost_spec() const { return spec_; }
  const std::string& growth_description() const { return growth_; }

  double theta_min() const { return actions_.least(); }
  /// sup A, +infinity when A is unbounded.
  double theta_max() const { return actions_.supremum(); }
  bool bounded() const { return actions_.bounded(); }
  bool contains(double x) const { return actions_.contains(x); }

  /// c(x); throws NotInActionSet when x is not in A (within kMembershipTol).
  double eval_cost(double x) const;

  /// Smallest maximizer of y x - c(x) over A, with its cost.
  Action best_response(double y) const;
  double psi(double y) const { return best_response(y).x; }

  /// sup over A of y x - c(x), evaluated at the smallest maximizer.
  double phi(double y) const;
  /// Running integral of psi from 0 to y with panels split at breakpoints.
  double phi_by_quadrature(double y) const;
  /// -min of phi over [0, p].
  double phi_star(double p) const;
  /// sup{y >= 0 : psi(y) = theta_min}; +infinity when psi never leaves it.
  double p_zero() const { return p_zero_; }

  /// Points y > 0 where psi jumps or changes analytic form, ascending.
  const std::vector<double>& psi_breakpoints() const { return breakpoints_; }

 private:
  enum class Shape { kPoint, kLinear, kConvex, kConcave, kTable };

  struct Piece {
    Interval domain;
    PieceCost cost;
    Shape shape = Shape::kPoint;
    double value(double x) const;
  };

  struct Choice {
    double x = 0.0;
    double cost = 0.0;
    int piece = 0;
    int position = 0;
    bool same_key(const Choice& o) const {
      return piece == o.piece && position == o.position;
    }
  };

  CostModel() = default;
  Choice choose(double y) const;
  void build_conjugate();

  ActionSet actions_;
  CostSpec spec_;
  std::vector<Piece> pieces_;
  std::string growth_;
  std::vector<double> breakpoints_;
  double p_zero_ = 0.0;

  friend CostModel effective_cost_hull(const CostModel& model);
};

/// Greatest convex minorant of c on [theta_min, sup A], returned as a model
/// with a single sampled piece. Supported only for bounded models whose pieces
/// are all points, linear or sampled (Unsupported otherwise).
CostModel effective_cost_hull(const CostModel& model);

}  // namespace driftctl
