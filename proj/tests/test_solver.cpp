#include <doctest.h>

#include <cmath>

#include "bdsde/path_engine.hpp"
#include "bdsde/solver.hpp"
#include "test_support.hpp"

using namespace bdsde;
using testing::registry_problem;

namespace {

struct Setup {
  ForwardModel model;
  TeugelsBasis basis;
  PathEnsemble paths;
};

Setup make_setup(const LevySpec& levy, int n_steps, std::size_t n_paths, std::uint64_t seed = 1, int m = 2) {
  ForwardModel model = testing::forward_model(levy, 1.0, n_steps);
  TeugelsBasis basis = orthonormal_basis(build_mu(model.levy), m);
  PathEnsemble paths = simulate_ensemble(model, basis, n_paths, seed);
  return {std::move(model), std::move(basis), std::move(paths)};
}

SolverConfig config(std::size_t n_paths, ReflectionMode mode = ReflectionMode::Projection, double n = 64.0) {
  SolverConfig c;
  c.n_paths = n_paths;
  c.mode = mode;
  c.penalization_n = n;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_ERROR_CODE(validate_solver_config(config(59)), ErrorCode::InvalidArgument);
  validate_solver_config(config(60));
  SolverConfig bad = config(1000, ReflectionMode::Penalization, 0.0);
  CHECK_ERROR_CODE(validate_solver_config(bad), ErrorCode::InvalidArgument);
}

TEST_CASE("constant terminal value without obstacle") {
  const Setup s = make_setup(testing::example51_levy(), 20, 500);
  const ProblemSpec p = registry_problem({"zero", {}}, {"zero", {}}, {"zero", {}}, {"constant", {0.7}}, {"none", {}});
  const EnsembleSolution sol = solve_penalized(p, config(500), s.paths);
  CHECK((sol.Y.array() - 0.7).abs().maxCoeff() < 1e-12);
  for (const auto& Z : sol.Z) CHECK(Z.array().abs().maxCoeff() < 1e-10);
  CHECK(sol.K.isZero(0.0));
  CHECK(sol.diagnostics.skorokhod_residual == 0.0);
}

TEST_CASE("deterministic obstacle in projection mode") {
  const int n = 100;
  const Setup s = make_setup(testing::example51_levy(), n, 500);
  const EnsembleSolution sol = solve_penalized(testing::deterministic_obstacle(), config(500), s.paths);
  const double dt = 1.0 / n;
  for (int k = 0; k <= n; ++k) CHECK((sol.Y.col(k).array() - (1.0 - s.paths.grid.t(k))).abs().maxCoeff() <= 2 * dt);
  CHECK(sol.diagnostics.k_T_mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.diagnostics.skorokhod_residual <= 2 * dt * sol.diagnostics.k_T_mean);
  CHECK(((sol.Y - sol.S).array() >= 0.0).all());
  CHECK(sol.K.col(0).isZero(0.0));
  for (int k = 0; k < n; ++k) CHECK((sol.K.col(k + 1).array() >= sol.K.col(k).array()).all());
}

TEST_CASE("penalized deterministic obstacle follows the discrete recursion") {
  // Null driver, h = 1 - t, l = 0: the gap d_k = S_k - Y_k obeys
  //   d_N = 0, d_k = (d_{k+1} + dt) / (1 + n dt).
  const int steps = 50;
  const double dt = 1.0 / steps;
  const Setup s = make_setup(testing::example51_levy(), steps, 200);
  for (double n : {1.0, 4.0, 16.0, 256.0}) {
    const EnsembleSolution sol =
        solve_penalized(testing::deterministic_obstacle(), config(200, ReflectionMode::Penalization, n), s.paths);
    double d = 0.0, K = 0.0;
    for (int k = steps - 1; k >= 0; --k) {
      const double gap_before = d + dt;
      d = gap_before / (1.0 + n * dt);
      K += gap_before - d;
      const double y = (1.0 - s.paths.grid.t(k)) - d;
      CHECK((sol.Y.col(k).array() - y).abs().maxCoeff() < 1e-12);
    }
    CHECK(sol.diagnostics.k_T_mean == doctest::Approx(K).epsilon(1e-12));
  }
}

TEST_CASE("penalized K_T approaches the ODE value 1 - (1 - e^-n)/n") {
  const int steps = 2000;
  const Setup s = make_setup(LevySpec{0.0, 0.0, {{0.5, 1.0}}, false}, steps, 100, 1, 1);
  double previous = 0.0;
  for (double n : {1.0, 4.0, 16.0}) {
    const EnsembleSolution sol =
        solve_penalized(testing::deterministic_obstacle(), config(100, ReflectionMode::Penalization, n), s.paths);
    const double exact = 1.0 - (1.0 - std::exp(-n)) / n;
    CHECK(sol.diagnostics.k_T_mean == doctest::Approx(exact).epsilon(5e-3));
    CHECK(sol.diagnostics.k_T_mean > previous);
    CHECK(sol.diagnostics.k_T_mean < 1.0);
    previous = sol.diagnostics.k_T_mean;
  }
}

TEST_CASE("penetration and Y_0 are monotone in n") {
  const Setup s = make_setup(testing::example51_levy(), 100, 300);
  const std::vector<double> schedule{4, 16, 64, 256};
  const auto family = solve_family(testing::deterministic_obstacle(), config(300), s.paths, schedule);
  for (std::size_t j = 1; j < family.size(); ++j) {
    CHECK(family[j].diagnostics.penetration_norm < family[j - 1].diagnostics.penetration_norm);
    CHECK(family[j].diagnostics.skorokhod_residual < family[j - 1].diagnostics.skorokhod_residual);
    CHECK((family[j].Y.array() >= family[j - 1].Y.array() - 1e-12).all());
  }
  const BoundReport bounds = apriori_bounds(family, schedule, s.paths);
  CHECK(bounds.bounded);
  for (std::size_t j = 1; j < bounds.entries.size(); ++j) {
    CHECK(bounds.entries[j].k_T2 > bounds.entries[j - 1].k_T2);
    CHECK(bounds.entries[j].k_T2 < 1.0);
  }
}

TEST_CASE("a priori norms are flat in n on the constant problem") {
  const Setup s = make_setup(testing::example51_levy(), 20, 300);
  const ProblemSpec p = registry_problem({"zero", {}}, {"zero", {}}, {"zero", {}}, {"constant", {2.0}}, {"none", {}});
  const std::vector<double> schedule{1, 2, 4, 8};
  const auto family = solve_family(p, config(300), s.paths, schedule);
  const BoundReport bounds = apriori_bounds(family, schedule, s.paths);
  for (const auto& e : bounds.entries) {
    CHECK(e.sup_y2 == doctest::Approx(4.0));
    CHECK(e.total == doctest::Approx(bounds.entries.front().total));
  }
  CHECK(bounds.bounded);
}

TEST_CASE("degenerate Teugels components give exact zero Z") {
  const Setup s = make_setup(LevySpec{0.0, 0.0, {{1.0, 1.0}}, false}, 20, 400, 3, 3);
  const ProblemSpec p = registry_problem({"example51", {}}, {"example51", {}}, {"zero", {}}, {"call", {0.0}},
                                         {"none", {}});
  const EnsembleSolution sol = solve_penalized(p, config(400), s.paths);
  REQUIRE(sol.Z.size() == 3);
  CHECK(sol.Z[1].isZero(0.0));
  CHECK(sol.Z[2].isZero(0.0));
  CHECK_FALSE(sol.Z[0].isZero(0.0));
}

TEST_CASE("terminal value below the obstacle is rejected") {
  const Setup s = make_setup(testing::example51_levy(), 10, 200);
  const ProblemSpec p = registry_problem({"zero", {}}, {"zero", {}}, {"zero", {}}, {"constant", {0.0}},
                                         {"constant", {0.5}});
  CHECK_ERROR_CODE(solve_penalized(p, config(200), s.paths), ErrorCode::TerminalBelowObstacle);
}

TEST_CASE("backward noise term with frozen B") {
  // f = phi = 0, g = c, l = a: Y_0 = a + c B_T on every path
  const Setup s = make_setup(testing::example51_levy(), 40, 300);
  const ProblemSpec p = registry_problem({"zero", {}}, {"zero", {}}, {"constant", {0.3}}, {"constant", {1.0}},
                                         {"none", {}});
  const EnsembleSolution sol = solve_penalized(p, config(300), s.paths);
  CHECK((sol.Y.col(0).array() - (1.0 + 0.3 * s.paths.B.back())).abs().maxCoeff() < 1e-12);
}

TEST_CASE("pathwise Y_0 estimator has the regression mean") {
  const Setup s = make_setup(testing::example51_levy(), 50, 2000);
  const EnsembleSolution sol = solve_penalized(testing::example51_problem(), config(2000), s.paths);
  CHECK(sol.pathwise_y0.mean() == doctest::Approx(sol.diagnostics.y0).epsilon(1e-9));
  CHECK(sol.diagnostics.y0_se > 0.0);
}

TEST_CASE("comparison: ordered terminal data with a z-free driver") {
  const Setup s = make_setup(testing::example51_levy(), 50, 2000);
  ProblemSpec high = registry_problem({"example51", {}}, {"example51", {}}, {"zero", {}}, {"constant", {1.0}},
                                      {"linear", {0.5, -0.5, 0.0}});
  ProblemSpec low = high;
  low.terminal = make_terminal({"constant", {0.0}});
  const EnsembleSolution s1 = solve_penalized(high, config(2000), s.paths);
  const EnsembleSolution s2 = solve_penalized(low, config(2000), s.paths);
  const ComparisonReport r = check_comparison_hypothesis(high, s1, s2, s.paths);
  CHECK(r.max_abs_beta == 0.0);
  CHECK(r.min_jump_sum == 0.0);
  CHECK(r.hypothesis_holds);
  CHECK(ordering_violation_fraction(s1, s2, 0.0) == 0.0);

  const ComparisonReport same = check_comparison_hypothesis(high, s1, s1, s.paths);
  CHECK(same.max_abs_beta == 0.0);
  CHECK(same.hypothesis_holds);
}

TEST_CASE("comparison hypothesis with a z-dependent driver stays above the interval bound") {
  const Setup s = make_setup(testing::example51_levy(), 50, 2000);
  const double c = 0.2;
  ProblemSpec p1 = registry_problem({"linear", {0.0, -0.1, c}}, {"example51", {}}, {"zero", {}}, {"constant", {1.0}},
                                    {"none", {}});
  ProblemSpec p2 = p1;
  p2.terminal = make_terminal({"example51", {}});
  const EnsembleSolution s1 = solve_penalized(p1, config(2000), s.paths);
  const EnsembleSolution s2 = solve_penalized(p2, config(2000), s.paths);
  const ComparisonReport r = check_comparison_hypothesis(p1, s1, s2, s.paths);
  double max_dH = 0.0;
  for (int i = 0; i < s.paths.basis_rank; ++i) max_dH = std::max(max_dH, s.paths.dH[static_cast<std::size_t>(i)].array().abs().maxCoeff());
  CHECK(r.max_abs_beta <= c + 1e-6);
  CHECK(r.min_jump_sum >= -c * s.paths.basis_rank * max_dH - 1e-12);
  CHECK(r.hypothesis_holds);
  CHECK(ordering_violation_fraction(s1, s2, 0.01) <= 0.01);
}

TEST_CASE("hypothesis spot checks") {
  ProblemSpec p = testing::example51_problem();
  const HypothesisReport ok = check_hypotheses(p, 1.0, 2, 5);
  CHECK(ok.lipschitz_ok);
  CHECK(ok.monotone_ok);
  CHECK(ok.worst_monotonicity == doctest::Approx(-0.5));
  p.lipschitz_c = 0.001;
  p.mono_beta = -0.9;
  const HypothesisReport bad = check_hypotheses(p, 1.0, 2, 5);
  CHECK_FALSE(bad.lipschitz_ok);
  CHECK_FALSE(bad.monotone_ok);
}

TEST_CASE("solve summary over several outer samples") {
  const ForwardModel model = testing::forward_model(testing::example51_levy(), 1.0, 20);
  const TeugelsBasis basis = orthonormal_basis(build_mu(model.levy), 2);
  SolverConfig c = config(600);
  c.outer_b_samples = 3;
  std::vector<EnsembleSolution> sols;
  const SolveSummary s = solve(testing::example51_problem(), c, model, basis, &sols);
  REQUIRE(sols.size() == 3);
  REQUIRE(s.y0_per_outer.size() == 3);
  CHECK(s.y0 == doctest::Approx((s.y0_per_outer[0] + s.y0_per_outer[1] + s.y0_per_outer[2]) / 3.0));
  CHECK(s.y0_se > 0.0);
  const SolveSummary again = solve(testing::example51_problem(), c, model, basis);
  CHECK(again.y0 == s.y0);
  CHECK(again.y0_se == s.y0_se);
}
