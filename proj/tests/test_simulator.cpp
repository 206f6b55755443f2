#include <doctest.h>

#include <cmath>

#include "simulator.hpp"

using namespace driftctl;

namespace {

const double kInf = numerics::kInf;

CostModel singleton(double theta) {
  return CostModel::validate(ActionSet::singleton(theta), CostSpec{{cost::Linear{}}});
}

CostModel free_drift() {
  return CostModel::validate(ActionSet::interval(0, kInf),
                             CostSpec{{cost::Exponential{1.0}}});
}

SimConfig small(std::size_t reps = 16, double T = 200) {
  SimConfig c;
  c.T = T;
  c.n_reps = reps;
  c.seed = 99;
  return c;
}

}  // namespace

TEST_CASE("zero drift rejection rate") {
  const SimResult r =
      simulate(singleton(0), PolicyProfile::constant(0, 1), {1, 1, 1}, small(16, 500));
  CHECK(std::abs(r.drop_rate.mean - 0.5) <= 3 * r.drop_rate.se + 0.01);
  CHECK(std::abs(r.lower_rate.mean - 0.5) <= 3 * r.lower_rate.se + 0.01);
  double total = 0;
  for (double h : r.histogram) total += h;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("unit drift average cost") {
  const double p = 2;
  const SimResult r =
      simulate(singleton(1), PolicyProfile::constant(1, 1), {1, 1, p}, small(16, 500));
  const double target = p / std::expm1(2.0);
  CHECK(std::abs(r.avg_cost.mean - target) <= std::max(3 * r.avg_cost.se, 0.02 * target));
}

TEST_CASE("overwhelming drift starves the upper boundary") {
  const SimResult r = simulate(free_drift(), PolicyProfile::constant(50, 1), {1, 1, 1},
                               small(4, 200));
  CHECK(r.drop_rate.mean < 1e-4 * 0.5);
}

TEST_CASE("determinism and thread independence") {
  SimConfig a = small(8, 50);
  a.threads = 1;
  SimConfig b = a;
  b.threads = 4;
  const PolicyProfile pol = PolicyProfile::constant(0.3, 1);
  const SimResult x = simulate(free_drift(), pol, {1, 1, 2}, a);
  const SimResult y = simulate(free_drift(), pol, {1, 1, 2}, b);
  CHECK(x.avg_cost.mean == y.avg_cost.mean);
  CHECK(x.avg_cost.se == y.avg_cost.se);
  CHECK(x.drop_rate.mean == y.drop_rate.mean);
  CHECK(x.histogram == y.histogram);
  a.seed = 100;
  CHECK(simulate(free_drift(), pol, {1, 1, 2}, a).drop_rate.mean != x.drop_rate.mean);
}

TEST_CASE("standard error shrinks like one over root n") {
  const PolicyProfile pol = PolicyProfile::constant(0.5, 1);
  double se[3];
  const std::size_t reps[3] = {16, 64, 256};
  for (int i = 0; i < 3; ++i)
    se[i] = simulate(free_drift(), pol, {1, 1, 3}, small(reps[i], 20)).avg_cost.se;
  for (int i = 0; i < 2; ++i) {
    const double ratio = se[i] / se[i + 1];
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 2.7);
  }
}

TEST_CASE("path stays in [0, b] and pushes never decrease") {
  SimConfig c = small(1, 20);
  for (ReflectionScheme s : {ReflectionScheme::kBridge, ReflectionScheme::kProjection}) {
    c.scheme = s;
    const auto path =
        simulate_path(singleton(0), PolicyProfile::constant(0, 1), {1, 1, 1}, c, 1);
    REQUIRE(path.size() > 1000);
    for (std::size_t i = 1; i < path.size(); ++i) {
      CHECK(path[i].z >= 0.0);
      CHECK(path[i].z <= 1.0);
      CHECK(path[i].L >= path[i - 1].L);
      CHECK(path[i].U >= path[i - 1].U);
      const bool both = path[i].L > path[i - 1].L && path[i].U > path[i - 1].U;
      CHECK_FALSE(both);
    }
  }
}

TEST_CASE("configuration guards") {
  SimConfig c = small();
  c.dt = 0.1;
  CHECK_THROWS_AS(check_sim_config(c, {1, 1, 1}), Error);
  c = small();
  c.z0 = 2;
  CHECK_THROWS_AS(check_sim_config(c, {1, 1, 1}), Error);
  c = small();
  c.burn_in = 0.7;
  CHECK_THROWS_AS(check_sim_config(c, {1, 1, 1}), Error);
  CHECK_NOTHROW(check_sim_config(small(), {1, 1, 1}));
}

TEST_CASE("inadmissible policies are rejected") {
  const CostModel two = CostModel::validate(
      ActionSet({{0, 0}, {1, 1}}), CostSpec{{cost::Linear{}, cost::Linear{0, 0.5}}});
  try {
    simulate(two, PolicyProfile::constant(0.5, 1), {1, 1, 1}, small(2, 10));
    FAIL("expected InadmissiblePolicy");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInadmissiblePolicy);
  }
}

TEST_CASE("validate_solution on a singleton model") {
  const CostModel m = singleton(1);
  const BellmanSolution sol = solve_bellman(m, {1, 1, 2});
  const RejectionReport rej = analyze_rejection(m, sol);
  const ValidationReport v = validate_solution(m, sol, rej, small(16, 500));
  CHECK(v.passed());
  CHECK_NOTHROW(require_passed(v));
  ValidationReport bad = v;
  bad.drop.pass = false;
  CHECK_THROWS_AS(require_passed(bad), Error);
}

TEST_CASE("compare_policies: identity ties") {
  const CostModel m = free_drift();
  const BellmanSolution sol = solve_bellman(m, {1, 1, 5});
  const PolicyProfile opt = PolicyProfile::optimal(sol);
  const Comparison c =
      compare_policies(m, opt, {{"same", opt}}, {1, 1, 5}, small(8, 50));
  REQUIRE(c.entries.size() == 2);
  CHECK(c.entries[1].diff.mean == 0.0);
  CHECK(c.reference_optimal());
}
