#include <doctest.h>

#include <driftctl/driftctl.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

const double kNaN = NAN;

dc_model* exponential_model() {
  dc_interval iv{0.0, INFINITY};
  dc_piece_cost c{DC_COST_EXPONENTIAL, {1.0, kNaN, kNaN, kNaN}, nullptr, nullptr, 0};
  dc_model* m = nullptr;
  REQUIRE(dc_model_create(&iv, &c, 1, &m) == DC_OK);
  return m;
}

dc_model* singleton_model(double theta) {
  dc_interval iv{theta, theta};
  dc_piece_cost c{DC_COST_LINEAR, {0.0, 0.0, kNaN, kNaN}, nullptr, nullptr, 0};
  dc_model* m = nullptr;
  REQUIRE(dc_model_create(&iv, &c, 1, &m) == DC_OK);
  return m;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("status names and classes") {
  CHECK(std::string(dc_status_name(DC_GROWTH_CONDITION_VIOLATED)) ==
        "GrowthConditionViolated");
  CHECK(dc_status_classify(DC_OK) == DC_CLASS_OK);
  CHECK(dc_status_classify(DC_PARSE_ERROR) == DC_CLASS_USAGE);
  CHECK(dc_status_classify(DC_NOT_NORMALIZED) == DC_CLASS_MODEL);
  CHECK(dc_status_classify(DC_STEP_TOO_LARGE) == DC_CLASS_NUMERICAL);
  CHECK(dc_status_classify(DC_VALIDATION_FAILED) == DC_CLASS_VALIDATION);
  CHECK(dc_version() != nullptr);
}

TEST_CASE("model errors set the last error") {
  dc_interval iv{0.0, INFINITY};
  dc_piece_cost c{DC_COST_LINEAR, {1.0, 0.0, kNaN, kNaN}, nullptr, nullptr, 0};
  dc_model* m = nullptr;
  CHECK(dc_model_create(&iv, &c, 1, &m) == DC_GROWTH_CONDITION_VIOLATED);
  CHECK(m == nullptr);
  CHECK(std::string(dc_last_error()).find("growth") != std::string::npos);
  CHECK(dc_model_create(nullptr, nullptr, 0, &m) != DC_OK);
}

TEST_CASE("conjugate queries") {
  dc_model* m = exponential_model();
  double x = 0;
  CHECK(dc_psi(m, 10.0, &x) == DC_OK);
  CHECK(x == doctest::Approx(std::log(10.0)));
  CHECK(dc_phi(m, 2.0, &x) == DC_OK);
  CHECK(x == doctest::Approx(2 * std::log(2.0) - 1).epsilon(1e-14));
  CHECK(dc_eval_cost(m, -1.0, &x) == DC_NOT_IN_ACTION_SET);
  CHECK(dc_p_zero(m) == doctest::Approx(1.0));
  CHECK(dc_model_theta_min(m) == 0.0);
  CHECK(std::isinf(dc_model_theta_max(m)));
  CHECK(std::string(dc_model_growth(m)) == "satisfied (exponential tail)");
  size_t n = 0;
  CHECK(dc_psi_breakpoints(m, nullptr, 0, &n) == DC_OK);
  dc_model_free(m);
}

TEST_CASE("solve, summary and tables") {
  dc_model* m = exponential_model();
  dc_params prm{1, 1, 5};
  dc_solution* s = nullptr;
  REQUIRE(dc_solve(m, &prm, nullptr, &s) == DC_OK);
  dc_solution_summary sum;
  dc_solution_summary_get(s, &sum);
  CHECK(sum.gamma == doctest::Approx(1.7233511998671097754).epsilon(1e-10));
  CHECK(sum.beta == doctest::Approx(0.19043849474058027044).epsilon(1e-8));
  CHECK(sum.gap == doctest::Approx(sum.gamma - 5 * sum.beta));
  CHECK(sum.residual_max <= 1e-6);
  CHECK(sum.beta_upper == 0.5);
  CHECK(sum.beta_lower == 0.0);
  const size_t n = dc_solution_size(s);
  CHECK(n == 1025);
  std::vector<double> z(n), v(n), u(n);
  dc_solution_grid(s, z.data(), v.data(), nullptr, nullptr);
  dc_solution_u(s, u.data());
  CHECK(v.front() == 0.0);
  CHECK(v.back() == doctest::Approx(5.0));
  CHECK(u.front() == 0.0);
  CHECK(u.back() == 1.0);
  double th = 0;
  CHECK(dc_solution_policy(s, 1.0, &th) == DC_OK);
  CHECK(th == doctest::Approx(std::log(5.0)));
  CHECK(dc_solution_policy(s, 2.0, &th) == DC_STATE_OUT_OF_RANGE);
  dc_solution_free(s);

  prm.b = -1;
  CHECK(dc_solve(m, &prm, nullptr, &s) == DC_NON_POSITIVE_PARAMETER);
  dc_model_free(m);
}

TEST_CASE("drop-rate helpers and sweeps") {
  double beta = 0;
  CHECK(dc_beta_constant(1, 1, 1, &beta) == DC_OK);
  CHECK(beta == doctest::Approx(1 / std::expm1(2.0)));
  dc_model* m = singleton_model(1);
  const double ps[] = {0.5, 1, 2, 10};
  dc_sweep_row rows[4];
  REQUIRE(dc_sweep(m, 1, 1, ps, 4, nullptr, rows) == DC_OK);
  for (const auto& r : rows) {
    CHECK(r.gamma == doctest::Approx(r.p / std::expm1(2.0)).epsilon(1e-10));
    CHECK(std::abs(r.gap) <= 1e-10);
  }
  CHECK(dc_sweep_check(rows, 4, 1e-9) == DC_OK);
  rows[2].beta = 1.0;
  CHECK(dc_sweep_check(rows, 4, 1e-9) == DC_NOT_MONOTONE);
  dc_model_free(m);
}

TEST_CASE("constrained through the C API") {
  dc_model* m = exponential_model();
  dc_solve_options opt{257, 0};
  dc_constrained_result r;
  dc_solution* s = nullptr;
  REQUIRE(dc_constrained(m, 1, 1, 0.2, &opt, &r, &s) == DC_OK);
  CHECK(r.slack == 0);
  CHECK(r.beta == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(s != nullptr);
  dc_solution_free(s);
  REQUIRE(dc_constrained(m, 1, 1, 0.7, &opt, &r, &s) == DC_OK);
  CHECK(r.slack == 1);
  CHECK(s == nullptr);
  dc_model_free(m);

  double sigma2 = 0, b = 0;
  REQUIRE(dc_wireless_setup(10, 0.2, 1, 1, 0, &m, &sigma2, &b) == DC_OK);
  CHECK(b == doctest::Approx(2.0));
  dc_model_free(m);
}

TEST_CASE("simulation through the C API") {
  dc_model* m = singleton_model(1);
  dc_params prm{1, 1, 2};
  dc_solution* s = nullptr;
  REQUIRE(dc_solve(m, &prm, nullptr, &s) == DC_OK);
  dc_sim_config cfg;
  dc_sim_config_default(&cfg);
  cfg.T = 300;
  cfg.n_reps = 8;
  cfg.seed = 5;
  std::vector<double> hist(cfg.hist_bins);
  dc_validation val;
  CHECK(dc_validate(s, &cfg, &val, hist.data()) == DC_OK);
  CHECK(val.cost_pass == 1);
  CHECK(val.drop_pass == 1);
  dc_sim_result again;
  std::vector<double> hist2(cfg.hist_bins);
  REQUIRE(dc_simulate_optimal(s, &cfg, &again, hist2.data()) == DC_OK);
  CHECK(again.avg_cost.mean == val.sim.avg_cost.mean);
  CHECK(hist == hist2);

  const double thetas[] = {1.0};
  dc_comparison_row row;
  CHECK(dc_compare_constants(s, thetas, 1, &cfg, &row, nullptr) == DC_OK);
  CHECK(row.optimal_wins == 1);

  const std::string path = "capi_path_test.csv";
  cfg.T = 1;
  REQUIRE(dc_write_path(s, &cfg, 10, path.c_str()) == DC_OK);
  CHECK(slurp(path).rfind("t,Z,L,U,xi\n", 0) == 0);
  std::remove(path.c_str());

  cfg.dt = 0.5;
  CHECK(dc_simulate_optimal(s, &cfg, &again, nullptr) == DC_STEP_TOO_LARGE);
  dc_solution_free(s);
  dc_model_free(m);
}

TEST_CASE("config handles") {
  dc_config* c = nullptr;
  REQUIRE(dc_config_parse("model { domain = [1] cost = [linear()] }\n"
                          "params { sigma2 = 1 b = 1 p = 2 }\n"
                          "sim { T = 50 seed = 3 }\n",
                          &c) == DC_OK);
  dc_model* m = nullptr;
  REQUIRE(dc_config_model(c, &m) == DC_OK);
  dc_params prm;
  REQUIRE(dc_config_params(c, &prm) == DC_OK);
  CHECK(prm.p == 2);
  CHECK(std::isnan(dc_config_beta_hat(c)));
  CHECK(dc_config_has_sim(c) == 1);
  dc_sim_config sim;
  dc_config_sim(c, &sim);
  CHECK(sim.T == 50);
  CHECK(sim.seed == 3);
  dc_model_free(m);
  dc_config_free(c);

  CHECK(dc_config_parse("params { nope = 1 }", &c) == DC_PARSE_ERROR);
  CHECK(std::string(dc_last_error()).find("line 1") != std::string::npos);
  CHECK(dc_config_load("/no/such/file", &c) == DC_IO_ERROR);
}
