#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(DRIFTCTL_EXE) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const std::string& name) { return std::string(CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("driftctl_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
  std::string sub(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("validate") {
  Run r = run("validate --config " + config("exponential.conf"));
  CHECK(r.code == 0);
  CHECK(r.out.find("growth condition: satisfied (exponential tail)") != std::string::npos);

  r = run("validate --config " + config("linear_unbounded.conf"));
  CHECK(r.code == 2);
  CHECK(r.out.find("GrowthConditionViolated") != std::string::npos);

  Scratch s;
  r = run("validate --config " + s.write("bad.conf", "params {\n  sigmaa = 1\n}\n"));
  CHECK(r.code == 1);
  CHECK(r.out.find("ParseError") != std::string::npos);
  CHECK(r.out.find("line 2") != std::string::npos);

  CHECK(run("validate").code == 1);
  CHECK(run("frobnicate --config " + config("exponential.conf")).code == 1);
  CHECK(run("validate --config /no/such.conf").code == 1);
}

TEST_CASE("solve writes the closed-form singleton values") {
  Scratch s;
  const Run r = run("solve --config " + config("unit_drift.conf") + " --out " + s.sub("o"));
  REQUIRE(r.code == 0);
  const auto kv = key_values(slurp(s.dir / "o" / "summary.txt"));
  CHECK(std::stod(kv.at("gamma")) == doctest::Approx(2 / std::expm1(2.0)).epsilon(1e-10));
  CHECK(std::stod(kv.at("beta")) == doctest::Approx(1 / std::expm1(2.0)).epsilon(1e-10));
  CHECK(std::stod(kv.at("residual_max")) <= 1e-6);
  const std::string csv = slurp(s.dir / "o" / "solution.csv");
  CHECK(csv.rfind("# sigma2=1,b=1,p=2,gamma=", 0) == 0);
  CHECK(csv.find("\nz,v,f,theta\n") != std::string::npos);
  CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("solve is deterministic") {
  Scratch s;
  REQUIRE(run("solve --config " + config("exponential.conf") + " --out " + s.sub("a")).code == 0);
  REQUIRE(run("solve --config " + config("exponential.conf") + " --out " + s.sub("b")).code == 0);
  CHECK(slurp(s.dir / "a" / "solution.csv") == slurp(s.dir / "b" / "solution.csv"));
  CHECK(slurp(s.dir / "a" / "summary.txt") == slurp(s.dir / "b" / "summary.txt"));
}

TEST_CASE("beta") {
  Scratch s;
  const Run r = run("beta --config " + config("exponential.conf") + " --out " + s.sub("o"));
  REQUIRE(r.code == 0);
  const auto kv = key_values(slurp(s.dir / "o" / "beta.txt"));
  CHECK(std::stod(kv.at("beta")) == doctest::Approx(0.19043849474058027044).epsilon(1e-8));
  CHECK(fs::exists(s.dir / "o" / "u.csv"));
}

TEST_CASE("constrained round trip, slack and infeasible budgets") {
  Scratch s;
  const std::string base =
      "model {\n  domain = [[0, inf]]\n  cost = [exponential(alpha = 1)]\n}\n";
  std::ostringstream budget;
  budget.precision(17);
  budget << 0.19043849474058027044;
  const Run r = run("constrained --config " +
                    s.write("rt.conf", base + "params { sigma2 = 1 b = 1 beta_hat = " +
                                           budget.str() + " }\n") +
                    " --out " + s.sub("rt"));
  REQUIRE(r.code == 0);
  const auto kv = key_values(slurp(s.dir / "rt" / "constrained.txt"));
  CHECK(std::stod(kv.at("p_star")) == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(fs::exists(s.dir / "rt" / "policy.csv"));

  const Run slack = run("constrained --config " +
                        s.write("slack.conf", base + "params { sigma2 = 1 b = 1 beta_hat = 0.6 }\n") +
                        " --out " + s.sub("slack"));
  CHECK(slack.code == 0);
  CHECK(slack.out.find("warning") != std::string::npos);

  const Run bad = run("constrained --config " +
                      s.write("bad.conf",
                              "model { domain = [[0, 1]] cost = [exponential()] }\n"
                              "params { sigma2 = 1 b = 1 beta_hat = 0.01 }\n") +
                      " --out " + s.sub("bad"));
  CHECK(bad.code == 2);
  CHECK(bad.out.find("InfeasibleBudget") != std::string::npos);
}

TEST_CASE("sweep") {
  Scratch s;
  const Run r = run("sweep --config " + config("exponential.conf") +
                    " --p-grid 0.01:100:12:log --out " + s.sub("o"));
  REQUIRE(r.code == 0);
  std::istringstream csv(slurp(s.dir / "o" / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "p,gamma,beta,gap");
  double prev_beta = 1e300, prev_gamma = -1;
  int rows = 0;
  while (std::getline(csv, line)) {
    double p, g, b, gap;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &p, &g, &b, &gap) == 4);
    if (rows == 0) CHECK(b == doctest::Approx(0.5).epsilon(0.01));
    CHECK(b <= prev_beta * (1 + 1e-9));
    CHECK(g >= prev_gamma);
    prev_beta = b;
    prev_gamma = g;
    ++rows;
  }
  CHECK(rows == 12);
  CHECK(run("sweep --config " + config("exponential.conf")).code == 1);
  CHECK(run("sweep --config " + config("exponential.conf") + " --p-grid 1:2").code == 1);
}

TEST_CASE("simulate: verdict, determinism and guards") {
  Scratch s;
  const std::string cfg = s.write(
      "sim.conf",
      "model { domain = [1] cost = [linear()] }\n"
      "params { sigma2 = 1 b = 1 p = 2 }\n"
      "sim { T = 300 n_reps = 8 seed = 11 }\n");
  const Run a = run("simulate --config " + cfg + " --out " + s.sub("a") + " --dump-path");
  REQUIRE(a.code == 0);
  CHECK(a.out.find("PASS") != std::string::npos);
  const Run b = run("simulate --config " + cfg + " --out " + s.sub("b") + " --dump-path");
  REQUIRE(b.code == 0);
  for (const char* f : {"simulation.txt", "histogram.csv", "path.csv"}) {
    CHECK(fs::exists(s.dir / "a" / f));
    CHECK(slurp(s.dir / "a" / f) == slurp(s.dir / "b" / f));
  }
  CHECK_FALSE(fs::exists(s.dir / "c" / "path.csv"));
  const Run c = run("simulate --config " + cfg + " --out " + s.sub("c") + " --seed 12");
  REQUIRE(c.code == 0);
  CHECK(slurp(s.dir / "a" / "histogram.csv") != slurp(s.dir / "c" / "histogram.csv"));

  const std::string coarse = s.write(
      "coarse.conf",
      "model { domain = [1] cost = [linear()] }\n"
      "params { sigma2 = 1 b = 1 p = 2 }\n"
      "sim { dt = 0.1 T = 10 n_reps = 2 }\n");
  const Run bad = run("simulate --config " + coarse + " --out " + s.sub("d"));
  CHECK(bad.code == 3);
  CHECK(bad.out.find("StepTooLarge") != std::string::npos);
}
