#include <doctest.h>

#include <cmath>

#include "rejection.hpp"

using namespace driftctl;

namespace {

const double kInf = numerics::kInf;
const double kE2m1 = std::expm1(2.0);

CostModel singleton(double theta) {
  return CostModel::validate(ActionSet::singleton(theta), CostSpec{{cost::Linear{}}});
}

CostModel exponential() {
  return CostModel::validate(ActionSet::interval(0, kInf),
                             CostSpec{{cost::Exponential{1.0}}});
}

}  // namespace

TEST_CASE("beta_constant") {
  CHECK(beta_constant(0, 1, 1) == 0.5);
  CHECK(beta_constant(1, 1, 1) == doctest::Approx(1 / kE2m1).epsilon(1e-15));
  CHECK(beta_constant(1e-12, 1, 1) == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(beta_constant(2, 1, 1) ==
        doctest::Approx(0.037314720727548095878).epsilon(1e-14));
  CHECK(beta_constant(-1, 1, 1) == doctest::Approx(1 + 1 / kE2m1).epsilon(1e-14));
}

TEST_CASE("beta_of_p on constant policies") {
  for (double th : {0.0, 1.0, -0.5, 3.0}) {
    const PolicyProfile pol = PolicyProfile::constant(th, 1.0);
    CHECK(beta_of_p(pol, 1.0) == doctest::Approx(beta_constant(th, 1, 1)).epsilon(1e-12));
  }
  const PolicyProfile wide = PolicyProfile::constant(0.7, 2.5);
  CHECK(beta_of_p(wide, 1.3) ==
        doctest::Approx(beta_constant(0.7, 1.3, 2.5)).epsilon(1e-12));
}

TEST_CASE("u on the zero policy is linear") {
  const UTable t = u_of_z(PolicyProfile::constant(0.0, 2.0), 1.0, 101);
  CHECK(t.u.front() == 0.0);
  CHECK(t.u.back() == 1.0);
  for (std::size_t i = 0; i < t.z.size(); ++i)
    CHECK(t.u[i] == doctest::Approx(t.z[i] / 2.0).epsilon(1e-12));
  CHECK(t.residual_max <= 1e-8);
}

TEST_CASE("beta_bounds") {
  const BetaBounds open = beta_bounds(exponential(), 1, 1);
  CHECK(open.upper == 0.5);
  CHECK(open.lower == 0.0);
  const CostModel box =
      CostModel::validate(ActionSet::interval(1, 2), CostSpec{{cost::Linear{1, -1}}});
  const BetaBounds b = beta_bounds(box, 1, 1);
  CHECK(b.upper == doctest::Approx(1 / kE2m1).epsilon(1e-14));
  CHECK(b.lower == doctest::Approx(2 / std::expm1(4.0)).epsilon(1e-14));
}

TEST_CASE("analyze_rejection: singleton gap is zero") {
  for (double p : {0.5, 1.0, 2.0, 10.0}) {
    const CostModel m = singleton(1);
    const BellmanSolution s = solve_bellman(m, {1, 1, p});
    const RejectionReport r = analyze_rejection(m, s);
    CHECK(r.beta == doctest::Approx(1 / kE2m1).epsilon(1e-10));
    CHECK(std::abs(r.gap) <= 1e-10);
    CHECK(r.u.u.front() == 0.0);
    CHECK(r.u.u.back() == 1.0);
  }
}

TEST_CASE("analyze_rejection: exponential oracle values") {
  const CostModel m = exponential();
  const double oracle[][3] = {{0.5, 0.5, 0.0},
                              {2, 0.37332683899468989649, 0.19504073579611228116},
                              {5, 0.19043849474058027044, 0.77115872616420842325},
                              {20, 0.062619466373222461023, 1.9949616239653100113}};
  for (const auto& row : oracle) {
    const ProblemParams prm{1, 1, row[0]};
    const BellmanSolution s = solve_bellman(m, prm);
    const RejectionReport r = analyze_rejection(m, s);
    CHECK(r.beta == doctest::Approx(row[1]).epsilon(1e-8));
    CHECK(r.gap == doctest::Approx(row[2]).epsilon(1e-7));
    CHECK(r.beta <= r.beta_upper * (1 + 1e-12));
    CHECK(r.beta >= r.beta_lower);
    CHECK(r.u.residual_max <= 1e-6);
    // independent route through the conjugate
    CHECK(beta_from_conjugate(m, prm, s.gamma) == doctest::Approx(r.beta).epsilon(1e-8));
  }
}

TEST_CASE("beta is constant below p0 and nonincreasing above") {
  const CostModel m = exponential();
  double prev = kInf;
  for (double p = 0.05; p < 500; p *= 1.7) {
    const BellmanSolution s = solve_bellman(m, {1, 1, p});
    const double beta = beta_of_p(PolicyProfile::optimal(s), 1.0);
    if (p <= m.p_zero()) CHECK(beta == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(beta <= prev * (1 + 1e-10));
    prev = beta;
  }
}

TEST_CASE("check_duality_gap") {
  CHECK(check_duality_gap(1.0, 0.25, 2.0) == doctest::Approx(0.5));
  CHECK(check_duality_gap(1.0, 0.5, 2.0 + 1e-9) == doctest::Approx(-5e-10));
  try {
    check_duality_gap(1.0, 0.6, 2.0);
    FAIL("expected DualityViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDualityViolation);
  }
}
