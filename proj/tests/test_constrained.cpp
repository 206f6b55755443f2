#include <doctest.h>

#include <cmath>

#include "constrained.hpp"

using namespace driftctl;

namespace {

const double kInf = numerics::kInf;

CostModel exponential() {
  return CostModel::validate(ActionSet::interval(0, kInf),
                             CostSpec{{cost::Exponential{1.0}}});
}

ConstrainedOptions fast() {
  ConstrainedOptions o;
  o.bellman.n_z = 257;
  return o;
}

ErrorCode code_of(const CostModel& m, const SystemParams& sys, double beta_hat) {
  try {
    solve_pstar(m, sys, {beta_hat}, fast());
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

}  // namespace

TEST_CASE("round trip through the forward map") {
  const CostModel m = exponential();
  for (double p : {2.0, 20.0}) {
    const double beta = optimal_beta(m, {1, 1, p}, fast().bellman);
    const ConstrainedResult r = solve_pstar(m, {1, 1}, {beta}, fast());
    CHECK(r.status == ConstrainedResult::Status::kBinding);
    CHECK(std::abs(r.p_star - p) <= 1e-6 * p);
    CHECK(std::abs(r.beta - beta) <= 1e-8 * r.bounds.upper);
    CHECK(r.energy_cost == doctest::Approx(r.gamma - r.p_star * r.beta).epsilon(1e-12));
    CHECK(r.energy_cost > 0.0);
    REQUIRE(r.solution.has_value());
    CHECK(r.solution->params.p == r.p_star);
  }
}

TEST_CASE("tighter budgets need larger penalties and more energy") {
  const CostModel m = exponential();
  const ConstrainedResult loose = solve_pstar(m, {1, 1}, {0.3}, fast());
  const ConstrainedResult tight = solve_pstar(m, {1, 1}, {0.1}, fast());
  CHECK(tight.p_star > loose.p_star);
  CHECK(tight.energy_cost > loose.energy_cost);
}

TEST_CASE("slack and infeasible budgets") {
  const CostModel m = exponential();
  const ConstrainedResult slack = solve_pstar(m, {1, 1}, {0.5}, fast());
  CHECK(slack.status == ConstrainedResult::Status::kSlack);
  CHECK(slack.energy_cost == 0.0);
  CHECK(slack.beta == 0.5);
  CHECK_FALSE(slack.solution.has_value());
  CHECK_FALSE(slack.warning.empty());

  CHECK(code_of(m, {1, 1}, 0.0) == ErrorCode::kNonPositiveParameter);
  const CostModel box =
      CostModel::validate(ActionSet::interval(0, 1), CostSpec{{cost::Exponential{}}});
  const double lo = beta_constant(1, 1, 1);
  CHECK(code_of(box, {1, 1}, lo) == ErrorCode::kInfeasibleBudget);
  CHECK(code_of(box, {1, 1}, 0.5 * lo) == ErrorCode::kInfeasibleBudget);
  CHECK(code_of(box, {1, 1}, -1) == ErrorCode::kNonPositiveParameter);
}

TEST_CASE("wireless_setup") {
  const WirelessSetup w = wireless_setup(10, 0.2, 1, 1, 0);
  CHECK(w.system.b == doctest::Approx(2.0));
  CHECK(w.system.sigma2 == 1.0);
  CHECK(w.model.eval_cost(0) == 0.0);
  CHECK(w.model.eval_cost(1) == doctest::Approx(std::expm1(1.0)).epsilon(1e-15));
  const WirelessSetup s = wireless_setup(4, 0.5, 2, 0.5, 1);
  CHECK(s.system.sigma2 == 0.25);
  CHECK(s.model.eval_cost(1.5) == doctest::Approx(std::expm1(1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(wireless_setup(0, 0.2, 1, 1, 0), Error);
  CHECK_THROWS_AS(wireless_setup(10, 0.2, -1, 1, 0), Error);
}
