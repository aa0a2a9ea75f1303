#include <doctest.h>

#include <cmath>
#include <random>

#include "bdsde/path_engine.hpp"
#include "bdsde/rng.hpp"
#include "bdsde/teugels_basis.hpp"
#include "test_support.hpp"

using namespace bdsde;

namespace {

// Independent route to c_{i,k}: with G the Hankel matrix of mu-moments,
// G = L L^T and C = L^{-1} gives C G C^T = I with positive diagonal.
Eigen::MatrixXd cholesky_coefficients(const AtomicMeasure& mu, int m) {
  Eigen::MatrixXd G(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) G(a, b) = mu.integrate([&](double x) { return std::pow(x, a + b); });
  }
  const Eigen::MatrixXd L = G.llt().matrixL();
  return L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(m, m));
}

LevySpec random_spec(std::mt19937_64& rng, int n_atoms) {
  std::uniform_real_distribution<double> size(0.2, 1.5), rate(0.3, 3.0);
  std::bernoulli_distribution sign(0.5);
  LevySpec spec;
  for (int i = 0; i < n_atoms; ++i) {
    const double b = (size(rng) + 1.6 * i) * (sign(rng) ? 1.0 : -1.0);
    spec.atoms.push_back({b, rate(rng)});
  }
  return spec;
}

}  // namespace

TEST_CASE("mu carries x^2 nu and the Gaussian mass at 0") {
  CHECK(build_mu(validate_levy_spec({0.0, 0.0, {{1.0, 1.0}}, false})) == AtomicMeasure{{{1.0, 1.0}}});
  CHECK(build_mu(validate_levy_spec({0.0, 1.0, {}, false})) == AtomicMeasure{{{0.0, 1.0}}});
  CHECK(build_mu(validate_levy_spec({0.0, 0.0, {{2.0, 3.0}}, false})) == AtomicMeasure{{{2.0, 12.0}}});
}

TEST_CASE("Poisson measure has rank one") {
  const TeugelsBasis b = orthonormal_basis(AtomicMeasure{{{1.0, 1.0}}}, 3);
  CHECK(b.rank() == 1);
  CHECK(b.requested() == 3);
  REQUIRE(b.degenerate_from().has_value());
  CHECK(*b.degenerate_from() == 2);
  CHECK(b.coeff(1, 1) == 1.0);
  CHECK(b.coeffs().bottomRows(2).isZero(0.0));
}

TEST_CASE("symmetric two-point measure gives q_1(x) = x") {
  const TeugelsBasis b = orthonormal_basis(AtomicMeasure{{{1.0, 0.5}, {-1.0, 0.5}}}, 2);
  CHECK(b.rank() == 2);
  CHECK_FALSE(b.degenerate_from().has_value());
  CHECK(b.coeff(1, 1) == doctest::Approx(1.0));
  CHECK(b.coeff(2, 2) == doctest::Approx(1.0));
  CHECK(b.coeff(2, 1) == doctest::Approx(0.0));
  CHECK(b.q(2, 0.3) == doctest::Approx(0.3));
  CHECK(b.p(2, 0.3) == doctest::Approx(0.09));
}

TEST_CASE("empty measure and bad request") {
  CHECK_ERROR_CODE(orthonormal_basis(AtomicMeasure{}, 2), ErrorCode::EmptyMeasure);
  CHECK_ERROR_CODE(orthonormal_basis(AtomicMeasure{{{1.0, 1.0}}}, 0), ErrorCode::InvalidArgument);
}

TEST_CASE("Gram-Schmidt agrees with the Cholesky route") {
  std::mt19937_64 rng(11);
  for (int n_atoms = 1; n_atoms <= 4; ++n_atoms) {
    for (int trial = 0; trial < 25; ++trial) {
      const auto spec = random_spec(rng, n_atoms);
      const AtomicMeasure mu = build_mu(validate_levy_spec(spec));
      const TeugelsBasis b = orthonormal_basis(mu, n_atoms);
      REQUIRE(b.rank() == n_atoms);
      const Eigen::MatrixXd C = cholesky_coefficients(mu, n_atoms);
      for (int i = 1; i <= n_atoms; ++i) {
        CHECK(b.coeff(i, i) > 0.0);
        for (int k = 1; k <= i; ++k) {
          CHECK(b.coeff(i, k) == doctest::Approx(C(i - 1, k - 1)).epsilon(1e-7));
        }
      }
      CHECK(b.max_orthonormality_error() < 1e-10);
    }
  }
}

TEST_CASE("rank equals the number of mu atoms") {
  std::mt19937_64 rng(3);
  for (int n_atoms = 1; n_atoms <= 3; ++n_atoms) {
    const auto spec = random_spec(rng, n_atoms);
    const TeugelsBasis b = orthonormal_basis(build_mu(validate_levy_spec(spec)), 5);
    CHECK(b.rank() == n_atoms);
    CHECK(b.coeffs().bottomRows(5 - n_atoms).isZero(0.0));
    LevySpec with_gauss = spec;
    with_gauss.sigma = 0.7;
    CHECK(orthonormal_basis(build_mu(validate_levy_spec(with_gauss)), 5).rank() == n_atoms + 1);
  }
}

TEST_CASE("Poisson increments are dN - dt and higher orders vanish") {
  const auto spec = validate_levy_spec({0.0, 0.0, {{1.0, 1.0}}, false});
  const TeugelsBasis basis = orthonormal_basis(build_mu(spec), 3);
  const TimeGrid grid(1.0, 4);
  LevyPath path;
  path.L = {0.0, 0.0, 1.0, 1.0, 3.0};
  path.jumps = {{1, 0.3, 1.0, 0}, {3, 0.8, 1.0, 0}, {3, 0.9, 1.0, 0}};
  const TeugelsIncrements inc = teugels_increments(path, grid, spec, basis);
  const double expected[] = {-0.25, 0.75, -0.25, 1.75};
  for (int k = 0; k < 4; ++k) {
    CHECK(inc.dH(k, 0) == doctest::Approx(expected[k]));
    CHECK(inc.dH(k, 1) == 0.0);
    CHECK(inc.dH(k, 2) == 0.0);
  }
}

TEST_CASE("increments follow the power-jump formula") {
  const LevySpec raw{0.2, 0.0, {{0.5, 1.0}, {-0.4, 1.5}, {1.2, 0.3}}, false};
  const auto spec = validate_levy_spec(raw);
  const AtomicMeasure mu = build_mu(spec);
  const TeugelsBasis basis = orthonormal_basis(mu, 3);
  const Eigen::MatrixXd C = cholesky_coefficients(mu, 3);
  const TimeGrid grid(1.0, 5);
  const double dt = grid.dt();
  const LevyPath path = simulate_levy(spec, grid, 99);
  const TeugelsIncrements inc = teugels_increments(path, grid, spec, basis);
  const double mean = 0.2 + 0.5 * 1.0 - 0.4 * 1.5 + 1.2 * 0.3;
  for (int k = 0; k < grid.n_steps(); ++k) {
    double dY[3] = {path.L[static_cast<std::size_t>(k) + 1] - path.L[static_cast<std::size_t>(k)] - dt * mean, 0.0, 0.0};
    for (int order = 2; order <= 3; ++order) {
      double comp = 0.0;
      for (const auto& a : raw.atoms) comp += a.intensity * std::pow(a.size, order);
      double sum = 0.0;
      for (const auto& j : path.jumps) {
        if (j.step == k) sum += std::pow(j.size, order);
      }
      dY[order - 1] = sum - dt * comp;
    }
    for (int i = 0; i < 3; ++i) {
      double expected = 0.0;
      for (int o = 0; o <= i; ++o) expected += C(i, o) * dY[o];
      CHECK(inc.dH(k, i) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("a step without jumps is pure compensator") {
  const auto spec = validate_levy_spec({0.0, 0.0, {{0.5, 1.0}, {-0.4, 1.5}}, false});
  const TeugelsBasis basis = orthonormal_basis(build_mu(spec), 2);
  const TimeGrid grid(1.0, 2);
  LevyPath path;
  path.L = {0.0, 0.0, 0.0};
  const TeugelsIncrements inc = teugels_increments(path, grid, spec, basis);
  // dY^1 = -dt E[L_1] = 0 here, dY^2 = -dt (0.25 + 0.24)
  const double dY2 = -0.5 * (0.25 * 1.0 + 0.16 * 1.5);
  CHECK(inc.dH(0, 0) == doctest::Approx(basis.coeff(1, 1) * (-0.5 * spec.mean_L1())));
  CHECK(inc.dH(0, 1) == doctest::Approx(basis.coeff(2, 1) * (-0.5 * spec.mean_L1()) + basis.coeff(2, 2) * dY2));
}

TEST_CASE("basis from another measure is rejected") {
  const auto a = validate_levy_spec({0.0, 0.0, {{1.0, 1.0}}, false});
  const auto b = validate_levy_spec({0.0, 0.0, {{2.0, 1.0}}, false});
  const TeugelsBasis basis = orthonormal_basis(build_mu(b), 1);
  const TimeGrid grid(1.0, 2);
  const LevyPath path = simulate_levy(a, grid, 1);
  CHECK_ERROR_CODE(teugels_increments(path, grid, a, basis), ErrorCode::RankMismatch);
}

TEST_CASE("degenerate components are bit-exactly zero on simulated paths") {
  const auto spec = validate_levy_spec({0.3, 0.0, {{0.7, 2.0}}, false});
  const TeugelsBasis basis = orthonormal_basis(build_mu(spec), 4);
  const TimeGrid grid(1.0, 50);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const TeugelsIncrements inc = teugels_increments(simulate_levy(spec, grid, s), grid, spec, basis);
    CHECK((inc.dH.rightCols(3).array() == 0.0).all());
  }
}

TEST_CASE("empirical strong orthonormality and zero mean") {
  const auto spec = validate_levy_spec({0.0, 0.0, {{0.5, 1.0}, {-0.4, 1.5}, {1.1, 0.4}}, false});
  const TeugelsBasis basis = orthonormal_basis(build_mu(spec), 3);
  const TimeGrid grid(1.0, 20);
  const int n = 20000;
  Eigen::MatrixXd HT(n, 3);
  for (int p = 0; p < n; ++p) {
    const auto inc = teugels_increments(simulate_levy(spec, grid, levy_seed(5, 0, static_cast<std::uint64_t>(p))), grid,
                                        spec, basis);
    HT.row(p) = inc.dH.colwise().sum();
  }
  for (int i = 0; i < 3; ++i) {
    const Eigen::ArrayXd h = HT.col(i).array();
    const double sd = std::sqrt((h - h.mean()).square().sum() / (n - 1));
    CHECK(std::abs(h.mean()) <= 4.0 * sd / std::sqrt(n));
    for (int j = 0; j < 3; ++j) {
      const Eigen::ArrayXd prod = h * HT.col(j).array();
      const double m = prod.mean();
      const double se = std::sqrt((prod - m).square().sum() / (n - 1)) / std::sqrt(n);
      CHECK(std::abs(m - (i == j ? 1.0 : 0.0)) <= 4.0 * se);
    }
  }
}
