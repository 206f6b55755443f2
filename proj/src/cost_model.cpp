#include "cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "numerics.hpp"

namespace driftctl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

// Fill in defaults that depend on the piece domain.
PieceCost resolve(PieceCost c, const Interval& dom) {
  if (auto* p = std::get_if<cost::Power>(&c)) {
    if (std::isnan(p->shift)) p->shift = dom.lo;
  } else if (auto* e = std::get_if<cost::Exponential>(&c)) {
    if (std::isnan(e->shift)) e->shift = dom.lo;
    if (std::isnan(e->offset)) e->offset = -e->scale;
  }
  return c;
}

double table_value(const cost::Table& t, double x) {
  if (t.x.size() == 1) return t.y.front();
  const std::size_t i = numerics::locate(t.x, x);
  const double w = (x - t.x[i]) / (t.x[i + 1] - t.x[i]);
  return t.y[i] + w * (t.y[i + 1] - t.y[i]);
}

double raw_value(const PieceCost& c, double x) {
  return std::visit(
      Overloaded{
          [x](const cost::Linear& l) { return l.slope * x + l.intercept; },
          [x](const cost::Power& p) {
            return p.coeff * std::pow(std::max(0.0, x - p.shift), p.exponent) +
                   p.offset;
          },
          [x](const cost::Exponential& e) {
            return e.scale * std::exp(e.alpha * (x - e.shift)) + e.offset;
          },
          [x](const cost::Table& t) { return table_value(t, x); },
      },
      c);
}

bool all_finite(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace

bool ActionSet::contains(double x, double tol) const {
  return std::any_of(pieces_.begin(), pieces_.end(), [&](const Interval& iv) {
    return x >= iv.lo - tol && x <= iv.hi + tol;
  });
}

double CostModel::Piece::value(double x) const { return raw_value(cost, x); }

ModelCheck CostModel::check(const ActionSet& actions, const CostSpec& spec) {
  ModelCheck out;
  auto issue = [&out](ErrorCode code, std::string msg) {
    out.issues.push_back({code, std::move(msg)});
  };

  const auto& pieces = actions.pieces();
  if (pieces.empty()) {
    issue(ErrorCode::kEmptyActionSet, "action set is empty");
    return out;
  }
  if (spec.pieces.size() != pieces.size()) {
    issue(ErrorCode::kMalformedModel,
          "cost has " + std::to_string(spec.pieces.size()) +
              " piece(s) but the action set has " +
              std::to_string(pieces.size()));
    return out;
  }

  // Domain shape.
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Interval& iv = pieces[i];
    const std::string where = "piece " + std::to_string(i);
    if (!std::isfinite(iv.lo) || std::isnan(iv.hi) || iv.hi < iv.lo ||
        iv.hi == -numerics::kInf) {
      issue(ErrorCode::kMalformedModel,
            where + ": invalid interval [" + fmt(iv.lo) + ", " + fmt(iv.hi) + "]");
    }
    if (i > 0 && !(pieces[i - 1].hi < iv.lo)) {
      issue(ErrorCode::kMalformedModel,
            where + ": pieces must be disjoint and sorted ascending");
    }
  }
  if (!out.ok()) return out;

  // Per-piece parameters.
  std::vector<Piece> resolved(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Interval& iv = pieces[i];
    const std::string where = "piece " + std::to_string(i);
    PieceCost c = resolve(spec.pieces[i], iv);
    resolved[i].domain = iv;
    resolved[i].cost = c;
    std::visit(
        Overloaded{
            [&](const cost::Linear& l) {
              if (!all_finite({l.slope, l.intercept}))
                issue(ErrorCode::kMalformedModel, where + ": non-finite linear parameters");
              else if (l.slope < 0.0 && !iv.is_point())
                issue(ErrorCode::kNotNondecreasing, where + ": negative linear slope");
            },
            [&](const cost::Power& p) {
              if (!all_finite({p.coeff, p.exponent, p.shift, p.offset}) ||
                  p.exponent <= 0.0)
                issue(ErrorCode::kMalformedModel, where + ": power needs finite parameters and exponent > 0");
              else if (p.shift > iv.lo)
                issue(ErrorCode::kMalformedModel, where + ": power shift must not exceed the piece's lower end");
              else if (p.coeff < 0.0 && !iv.is_point())
                issue(ErrorCode::kNotNondecreasing, where + ": negative power coefficient");
            },
            [&](const cost::Exponential& e) {
              if (!all_finite({e.alpha, e.shift, e.scale, e.offset}) || e.alpha <= 0.0)
                issue(ErrorCode::kMalformedModel, where + ": exponential needs finite parameters and alpha > 0");
              else if (e.scale < 0.0 && !iv.is_point())
                issue(ErrorCode::kNotNondecreasing, where + ": negative exponential scale");
            },
            [&](const cost::Table& t) {
              if (t.x.size() != t.y.size() || t.x.empty()) {
                issue(ErrorCode::kMalformedModel, where + ": table needs matching, nonempty x and y");
                return;
              }
              if (iv.unbounded()) {
                issue(ErrorCode::kMalformedModel, where + ": sampled cost cannot cover an unbounded piece");
                return;
              }
              if (iv.is_point() != (t.x.size() == 1) ||
                  std::abs(t.x.front() - iv.lo) > kValueTol ||
                  std::abs(t.x.back() - iv.hi) > kValueTol) {
                issue(ErrorCode::kMalformedModel, where + ": table knots must span the piece exactly");
                return;
              }
              for (std::size_t k = 0; k < t.x.size(); ++k) {
                if (!all_finite({t.x[k], t.y[k]})) {
                  issue(ErrorCode::kMalformedModel, where + ": non-finite table entry");
                  return;
                }
                if (k > 0 && !(t.x[k] > t.x[k - 1])) {
                  issue(ErrorCode::kMalformedModel, where + ": table x must be strictly increasing");
                  return;
                }
                if (k > 0 && t.y[k] < t.y[k - 1]) {
                  issue(ErrorCode::kNotNondecreasing, where + ": table y decreases at knot " + std::to_string(k));
                  return;
                }
              }
            },
        },
        c);
  }
  if (!out.ok()) return out;

  // Across pieces: nondecreasing, normalized, strictly positive off theta_min.
  for (std::size_t i = 1; i < resolved.size(); ++i) {
    const double left = resolved[i - 1].value(resolved[i - 1].domain.hi);
    const double right = resolved[i].value(resolved[i].domain.lo);
    if (right < left - kValueTol)
      issue(ErrorCode::kNotNondecreasing,
            "cost drops from " + fmt(left) + " to " + fmt(right) +
                " between pieces " + std::to_string(i - 1) + " and " +
                std::to_string(i));
  }
  const double c_min = resolved.front().value(actions.least());
  if (std::abs(c_min) > kValueTol)
    issue(ErrorCode::kNotNormalized,
          "c(theta_min) = " + fmt(c_min) + ", expected 0");

  const Piece& first = resolved.front();
  if (!first.domain.is_point()) {
    const bool rises = std::visit(
        Overloaded{
            [](const cost::Linear& l) { return l.slope > 0.0; },
            [](const cost::Power& p) { return p.coeff > 0.0; },
            [](const cost::Exponential& e) { return e.scale > 0.0; },
            [](const cost::Table& t) { return t.y.size() > 1 && t.y[1] > t.y[0]; },
        },
        first.cost);
    if (!rises)
      issue(ErrorCode::kNotPositive,
            "cost must be strictly positive just above theta_min");
  }
  for (std::size_t i = 1; i < resolved.size(); ++i) {
    if (!(resolved[i].value(resolved[i].domain.lo) > 0.0))
      issue(ErrorCode::kNotPositive,
            "cost must be strictly positive on piece " + std::to_string(i));
  }

  // Growth condition on an unbounded tail, classified per family.
  if (actions.bounded()) {
    out.growth = "not required (bounded action set)";
  } else {
    const PieceCost& tail = resolved.back().cost;
    std::string why;
    bool ok = std::visit(
        Overloaded{
            [&](const cost::Linear&) {
              why = "linear tail";
              return false;
            },
            [&](const cost::Power& p) {
              why = p.exponent > 1.0 ? "superlinear power tail"
                                     : "power tail with exponent <= 1";
              return p.exponent > 1.0 && p.coeff > 0.0;
            },
            [&](const cost::Exponential& e) {
              why = "exponential tail";
              return e.scale > 0.0;
            },
            [&](const cost::Table&) {
              why = "sampled tail";
              return false;
            },
        },
        tail);
    if (ok) {
      out.growth = "satisfied (" + why + ")";
    } else {
      out.growth = "violated (" + why + ")";
      issue(ErrorCode::kGrowthConditionViolated,
            "growth condition violated: inf{c(x)/x : x >= y} does not diverge "
            "on the unbounded tail (" + why + ")");
    }
  }
  return out;
}

CostModel CostModel::validate(ActionSet actions, CostSpec spec) {
  ModelCheck chk = check(actions, spec);
  if (!chk.ok()) {
    // The first issue's name travels as the error code.
    std::string msg = chk.issues.front().message;
    for (std::size_t i = 1; i < chk.issues.size(); ++i)
      msg += "; " + std::string(error_name(chk.issues[i].code)) + ": " +
             chk.issues[i].message;
    fail(chk.issues.front().code, msg);
  }

  CostModel m;
  m.actions_ = std::move(actions);
  m.spec_ = std::move(spec);
  m.growth_ = chk.growth;
  const auto& ivs = m.actions_.pieces();
  m.pieces_.resize(ivs.size());
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    Piece& p = m.pieces_[i];
    p.domain = ivs[i];
    p.cost = resolve(m.spec_.pieces[i], ivs[i]);
    if (p.domain.is_point()) {
      p.shape = Shape::kPoint;
    } else {
      p.shape = std::visit(
          Overloaded{
              [](const cost::Linear&) { return Shape::kLinear; },
              [](const cost::Power& pw) {
                if (pw.coeff == 0.0 || pw.exponent == 1.0) return Shape::kLinear;
                return pw.exponent > 1.0 ? Shape::kConvex : Shape::kConcave;
              },
              [](const cost::Exponential& e) {
                return e.scale > 0.0 ? Shape::kConvex : Shape::kLinear;
              },
              [](const cost::Table&) { return Shape::kTable; },
          },
          p.cost);
    }
  }
  m.build_conjugate();
  return m;
}

double CostModel::eval_cost(double x) const {
  for (const Piece& p : pieces_) {
    if (x >= p.domain.lo - kMembershipTol && x <= p.domain.hi + kMembershipTol)
      return p.value(std::clamp(x, p.domain.lo, p.domain.hi));
  }
  fail(ErrorCode::kNotInActionSet, "x = " + fmt(x) + " is not in the action set");
}

CostModel::Choice CostModel::choose(double y) const {
  Choice best;
  double best_val = 0.0;
  bool have = false;
  auto consider = [&](double x, double c, int piece, int pos) {
    const double val = y * x - c;
    if (have) {
      const double tol =
          kTieTol * std::max({1.0, std::abs(val), std::abs(best_val)});
      if (!(val > best_val + tol)) return;
    }
    best = {x, c, piece, pos};
    best_val = val;
    have = true;
  };

  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece& p = pieces_[i];
    const int idx = int(i);
    const double lo = p.domain.lo;
    const double hi = p.domain.hi;
    switch (p.shape) {
      case Shape::kPoint:
        consider(lo, p.value(lo), idx, 0);
        break;
      case Shape::kLinear:
      case Shape::kConcave:
        consider(lo, p.value(lo), idx, 0);
        if (!p.domain.unbounded()) consider(hi, p.value(hi), idx, 2);
        break;
      case Shape::kConvex: {
        double xs = lo;
        if (y > 0.0) {
          if (const auto* e = std::get_if<cost::Exponential>(&p.cost)) {
            xs = e->shift + std::log(y / (e->scale * e->alpha)) / e->alpha;
          } else {
            const auto& pw = std::get<cost::Power>(p.cost);
            xs = pw.shift +
                 std::pow(y / (pw.coeff * pw.exponent), 1.0 / (pw.exponent - 1.0));
          }
        }
        if (!(xs > lo)) {
          consider(lo, p.value(lo), idx, 0);
        } else if (xs >= hi) {
          consider(hi, p.value(hi), idx, 2);
        } else {
          consider(xs, p.value(xs), idx, 1);
        }
        break;
      }
      case Shape::kTable: {
        const auto& t = std::get<cost::Table>(p.cost);
        for (std::size_t k = 0; k < t.x.size(); ++k)
          consider(t.x[k], t.y[k], idx, int(k));
        break;
      }
    }
  }
  return best;
}

Action CostModel::best_response(double y) const {
  const Choice c = choose(y);
  return {c.x, c.cost};
}

double CostModel::phi(double y) const {
  const Choice c = choose(y);
  return y * c.x - c.cost;
}

double CostModel::phi_by_quadrature(double y) const {
  if (y <= 0.0) return 0.0;
  return numerics::integrate_split([this](double u) { return psi(u); }, 0.0, y,
                                   breakpoints_, 1e-12);
}

double CostModel::phi_star(double p) const {
  if (theta_min() >= 0.0) return std::max(0.0, -phi(0.0));
  if (psi(p) <= 0.0) return -phi(p);
  // phi is convex with phi' = psi: its minimum on [0, p] sits where psi turns
  // positive.
  double lo = 0.0;
  double hi = p;
  for (int it = 0; it < 200 && hi - lo > 4.0 * kEps * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (psi(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return -std::min(phi(lo), phi(hi));
}

void CostModel::build_conjugate() {
  // The argmax key (piece, position) is a nondecreasing function of y, so a
  // change of key between two points brackets at least one breakpoint and
  // equal keys rule out any.
  const Piece& last = pieces_.back();
  Choice final_key;
  final_key.piece = int(pieces_.size()) - 1;
  switch (last.shape) {
    case Shape::kPoint: final_key.position = 0; break;
    case Shape::kTable:
      final_key.position = int(std::get<cost::Table>(last.cost).x.size()) - 1;
      break;
    case Shape::kConvex:
      final_key.position = last.domain.unbounded() ? 1 : 2;
      break;
    case Shape::kLinear:
    case Shape::kConcave: final_key.position = 2; break;
  }

  const Choice at_zero = choose(0.0);
  double horizon = 1.0;
  Choice at_horizon = choose(horizon);
  while (!at_horizon.same_key(final_key)) {
    horizon *= 2.0;
    if (!std::isfinite(horizon))
      fail(ErrorCode::kBracketingFailed,
           "smallest maximizer never reaches the last action piece");
    at_horizon = choose(horizon);
  }

  struct Segment {
    double a;
    Choice ca;
    double b;
    Choice cb;
  };
  std::vector<Segment> stack{{0.0, at_zero, horizon, at_horizon}};
  std::vector<double> found;
  while (!stack.empty()) {
    Segment s = stack.back();
    stack.pop_back();
    if (s.ca.same_key(s.cb)) continue;
    if (s.b - s.a <= 4.0 * kEps * s.b || s.b < 1e-280) {
      found.push_back(s.a);
      continue;
    }
    const double m = s.a + 0.5 * (s.b - s.a);
    const Choice cm = choose(m);
    stack.push_back({m, cm, s.b, s.cb});
    stack.push_back({s.a, s.ca, m, cm});
  }
  std::sort(found.begin(), found.end());
  p_zero_ = found.empty() ? numerics::kInf : found.front();
  for (double y : found) {
    if (y > 0.0 && (breakpoints_.empty() || y > breakpoints_.back()))
      breakpoints_.push_back(y);
  }
}

CostModel effective_cost_hull(const CostModel& model) {
  if (!model.bounded())
    fail(ErrorCode::kUnsupported, "convex hull needs a bounded action set");
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : model.pieces_) {
    if (p.shape == CostModel::Shape::kPoint) {
      pts.emplace_back(p.domain.lo, p.value(p.domain.lo));
    } else if (p.shape == CostModel::Shape::kTable) {
      const auto& t = std::get<cost::Table>(p.cost);
      for (std::size_t k = 0; k < t.x.size(); ++k) pts.emplace_back(t.x[k], t.y[k]);
    } else if (p.shape == CostModel::Shape::kLinear) {
      pts.emplace_back(p.domain.lo, p.value(p.domain.lo));
      pts.emplace_back(p.domain.hi, p.value(p.domain.hi));
    } else {
      fail(ErrorCode::kUnsupported,
           "convex hull is only built for point, linear and sampled pieces");
    }
  }
  // Lower hull, monotone chain.
  std::vector<std::pair<double, double>> hull;
  for (const auto& q : pts) {
    while (hull.size() >= 2) {
      const auto& o = hull[hull.size() - 2];
      const auto& a = hull.back();
      const double cross =
          (a.first - o.first) * (q.second - o.second) -
          (a.second - o.second) * (q.first - o.first);
      if (cross <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(q);
  }
  if (hull.size() == 1) {
    return CostModel::validate(ActionSet::singleton(hull[0].first),
                               CostSpec{{cost::Linear{0.0, hull[0].second}}});
  }
  cost::Table t;
  for (const auto& [x, c] : hull) {
    t.x.push_back(x);
    t.y.push_back(c);
  }
  return CostModel::validate(ActionSet::interval(t.x.front(), t.x.back()),
                             CostSpec{{t}});
}

}  // namespace driftctl
