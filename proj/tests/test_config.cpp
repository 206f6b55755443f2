#include <doctest.h>

#include <cmath>
#include <string>

#include "config.hpp"
#include "report.hpp"

using namespace driftctl;

namespace {

std::string parse_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("full exponential config") {
  const RunConfig c = parse_config(R"(
# comment
model {
  domain = [[0, inf]]
  cost = [exponential(alpha = 1)]
}
params { sigma2 = 1  b = 1  p = 5  n_z = 513 }
sim { dt = 2e-3  T = 100  n_reps = 8  seed = 42  scheme = projection  threads = 2 }
output { dir = "out/x" }
)");
  const CostModel m = c.model();
  CHECK(m.eval_cost(1) == doctest::Approx(std::expm1(1.0)));
  const ProblemParams p = c.problem();
  CHECK(p.sigma2 == 1);
  CHECK(p.b == 1);
  CHECK(p.p == 5);
  CHECK(c.bellman_options().n_z == 513);
  CHECK(c.has_sim);
  CHECK(c.sim.dt == 2e-3);
  CHECK(c.sim.T == 100);
  CHECK(c.sim.n_reps == 8);
  CHECK(c.sim.seed == 42);
  CHECK(c.sim.threads == 2);
  CHECK(c.sim.scheme == ReflectionScheme::kProjection);
  CHECK(c.out_dir == "out/x");
  CHECK_FALSE(c.beta_hat.has_value());
}

TEST_CASE("points, tables and wireless blocks") {
  const RunConfig c = parse_config(R"(
model {
  domain = [0, [1, 3]]
  cost = [linear(), table(x = [1, 2, 3], y = [0.5, 1, 4])]
}
params { sigma2 = 2 b = 0.5 beta_hat = 0.1 }
)");
  const CostModel m = c.model();
  CHECK(m.eval_cost(2.5) == doctest::Approx(2.5));
  CHECK(m.contains(0.0));
  CHECK_FALSE(m.contains(0.5));
  CHECK(*c.beta_hat == 0.1);
  CHECK_THROWS_AS(c.problem(), Error);
  CHECK(c.system().sigma2 == 2);

  const RunConfig w = parse_config(
      "wireless { lambda = 10 d = 0.2 alpha = 1 sigma = 1 theta_min = 0 }\n"
      "params { beta_hat = 0.1 }\n");
  CHECK(w.system().b == doctest::Approx(2.0));
  CHECK(w.model().eval_cost(1) == doctest::Approx(std::expm1(1.0)));
}

TEST_CASE("parse errors carry the line") {
  CHECK(parse_message("params {\n  sigma2 = 1\n  bogus = 2\n}\n").find("line 3") !=
        std::string::npos);
  CHECK(parse_message("params { p = 1 p = 2 }").find("duplicate key") != std::string::npos);
  CHECK(parse_message("params { p = 1 }\nparams { b = 1 }").find("line 2") !=
        std::string::npos);
  CHECK(parse_message("nonsense { }").find("unknown block") != std::string::npos);
  CHECK(parse_message("params { p = 1 beta_hat = 0.1 }").find("not both") !=
        std::string::npos);
  CHECK(parse_message("params { p = abc }") != "");
  CHECK(parse_message("model { domain = [[0, 1]] cost = [quadratic()] }")
            .find("unknown cost kind") != std::string::npos);
  CHECK(parse_message("params { p = 1 ").find("not closed") != std::string::npos);
  CHECK(parse_message(
            "wireless { lambda = 1 d = 1 alpha = 1 sigma = 1 theta_min = 0 }\n"
            "model { domain = [0] cost = [linear()] }") != "");
}

TEST_CASE("missing required parameters") {
  const RunConfig c = parse_config("model { domain = [0] cost = [linear()] }\nparams { b = 1 p = 1 }");
  CHECK_THROWS_AS(c.system(), Error);
  const RunConfig none = parse_config("params { sigma2 = 1 b = 1 p = 1 }");
  CHECK_THROWS_AS(none.model(), Error);
}

TEST_CASE("load_config reports missing files") {
  try {
    load_config("/nonexistent/file.conf");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIoError);
  }
}

TEST_CASE("report formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(2.0) == "2");
  CHECK(std::stod(format_number(M_PI)) == M_PI);
  const std::string s = sweep_csv({{1, 2, 0.5, 1}});
  CHECK(s == "p,gamma,beta,gap\n1,2,0.5,1\n");
  const std::string h = histogram_csv({0.25, 0.75}, 2.0);
  CHECK(h == "z_lo,z_hi,fraction\n0,1,0.25\n1,2,0.75\n");
  CHECK(summary_text({{"gamma", "1"}, {"beta", "0.5"}}) == "gamma=1\nbeta=0.5\n");
}
