#include <doctest.h>

#include <random>
#include <sstream>

#include "bdsde/config.hpp"
#include "bdsde/suite.hpp"
#include "test_support.hpp"

using namespace bdsde;

namespace {

const char* kMinimal = R"(
[levy]
atom = 1.0 1.0

[grid]
n_steps = 50

[suite]
select = orthonormality
)";

std::string deterministic_family_text() {
  return R"(
# null driver, h(t, x) = 1 - t, l = 0
[levy]
drift_b = 0.1
atom = 0.5 1.0
atom = -0.4 1.5

[grid]
n_steps = 100
fd_space_intervals = 100
fd_time_steps = 200

[problem]
driver = zero
boundary = zero
noise = zero
terminal = constant 0
obstacle = linear 1 -1 0

[solver]
paths = 2000
seed = 4242

[suite]
select = all
strong_paths = 20000
skorokhod_paths = 300
fk_paths = 2000
fk_steps = 100
)";
}

}  // namespace

TEST_CASE("minimal file gets the defaults") {
  const ExperimentConfig c = parse_config(kMinimal);
  CHECK(c.levy.atoms == std::vector<JumpAtom>{{1.0, 1.0}});
  CHECK(c.grid.n_steps == 50);
  CHECK(c.grid.horizon == 1.0);
  CHECK(c.solver.solver.n_paths == 10000);
  CHECK(c.solver.teugels_m == 2);
  CHECK(c.problem.driver.name == "example51");
  REQUIRE(c.suite.selected.size() == 1);
  CHECK(c.suite.selected[0] == SuiteKind::Orthonormality);
}

TEST_CASE("parse errors carry the line number") {
  auto expect_line = [](const std::string& text, int line) {
    try {
      parse_config(text);
      FAIL("no error for: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigParseError);
      CHECK(std::string(e.what()).find("line " + std::to_string(line)) != std::string::npos);
    }
  };
  expect_line("[levy]\natom = 1 1\n[grid]\nn_steps = 0\n", 4);
  expect_line("[levy]\natom = 1 1\n[grid]\nn_stesp = 10\n", 4);
  expect_line("[levy]\natom = 1 1\n[bogus]\n", 3);
  expect_line("[levy]\natom = 1 1\natom = 1 2\n", 3);
  expect_line("[levy]\natom = 1\n", 2);
  expect_line("[levy]\natom = 1 1\n[solver]\nseed = 1\nseed = 2\n", 5);
  expect_line("[levy]\natom = 1 1\n[grid]\nhorizon = abc\n", 4);
  expect_line("drift_b = 1\n", 1);
  expect_line("[levy]\natom = 1 1\n[suite]\nselect = orthonormality uniqness\n", 4);
}

TEST_CASE("misspelled coefficient name") {
  CHECK_ERROR_CODE(parse_config("[levy]\natom = 1 1\n[problem]\ndriver = examle51\n"),
                   ErrorCode::UnknownCoefficientName);
  ExperimentConfig c = default_config();
  c.problem.obstacle.name = "examle51";
  CHECK_ERROR_CODE(run_suite(c), ErrorCode::UnknownCoefficientName);
}

TEST_CASE("serialize then parse gives the same config") {
  CHECK(parse_config(serialize_config(default_config())) == default_config());
  const ExperimentConfig det = parse_config(deterministic_family_text());
  CHECK(parse_config(serialize_config(det)) == det);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    ExperimentConfig c = default_config();
    c.levy.drift_b = u(rng) - 1.5;
    c.levy.atoms = {{u(rng), u(rng)}, {-u(rng) - 3.0, u(rng)}};
    c.levy.compensated = trial % 2 == 0;
    c.grid.horizon = u(rng);
    c.forward.theta = 1.0 + u(rng);
    c.forward.x0 = (u(rng) - 1.5) / 2.0;
    c.forward.sigma_x = {"linear", {u(rng), 0.1 * u(rng)}};
    c.problem.driver = {"linear", {u(rng), -u(rng), u(rng)}};
    c.problem.mono_beta = -u(rng);
    c.solver.solver.boundary_layer = 0.01 * u(rng);
    c.solver.solver.seed = rng();
    c.solver.schedule = {u(rng), 10.0 + u(rng)};
    c.suite.selected = {SuiteKind::Uniqueness, SuiteKind::Skorokhod};
    c.suite.second_seed = rng();
    c.output_dir = "out/run" + std::to_string(trial);
    CHECK(parse_config(serialize_config(c)) == c);
  }
}

TEST_CASE("model and problem from the config") {
  const ExperimentConfig c = default_config();
  const ForwardModel m = make_model(c);
  CHECK(m.grid.n_steps() == c.grid.n_steps);
  CHECK(m.levy.mean_L1() == doctest::Approx(0.0).epsilon(1e-15));
  const ProblemSpec p = make_problem(c);
  CHECK(p.g_is_zero);
  CHECK_FALSE(p.f_depends_on_z);
  CHECK(p.phi(0.0, 1.0, 2.0) == -1.0);
  CHECK(p.obstacle(0.0, 0.5) == doctest::Approx(0.05));
  CHECK(make_basis(c).rank() == 2);
}

TEST_CASE("orthonormality alone on the Poisson spec") {
  const SuiteReport r = run_suite(parse_config(kMinimal));
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].suite == "orthonormality");
  CHECK(r.rows[0].status == SuiteStatus::Pass);
  CHECK(r.rows[0].detail.find("exactly zero") != std::string::npos);
  CHECK(r.passed());
}

TEST_CASE("full suite on the deterministic obstacle family") {
  const ExperimentConfig c = parse_config(deterministic_family_text());
  const SuiteReport r = run_suite(c);
  REQUIRE(r.rows.size() == std::size(kAllSuites));
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].suite == suite_name(kAllSuites[i]));
    CHECK_MESSAGE(r.rows[i].status == SuiteStatus::Pass, r.rows[i].suite << ": " << r.rows[i].detail);
  }
  CHECK(r.passed());

  std::ostringstream a, b;
  write_suite_csv(a, r);
  write_suite_csv(b, run_suite(c));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("suite,status,value,tolerance,seed,detail\n", 0) == 0);
}

TEST_CASE("failures inside a suite become failed rows") {
  ExperimentConfig c = default_config();
  c.suite.selected = {SuiteKind::FeynmanKac};
  c.grid.fd_time_steps = 301;  // not a multiple of fk_steps
  c.suite.fk_paths = 500;
  const SuiteReport r = run_suite(c);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].status == SuiteStatus::Fail);
  CHECK(r.rows[0].detail.find("GridIncompatible") != std::string::npos);
  CHECK_FALSE(r.passed());
}
