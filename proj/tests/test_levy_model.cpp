#include <doctest.h>

#include <random>

#include "bdsde/levy_model.hpp"
#include "test_support.hpp"

using namespace bdsde;

TEST_CASE("validation accepts the Poisson and empty specs") {
  const auto poisson = validate_levy_spec({0.0, 0.0, {{1.0, 1.0}}, false});
  CHECK(poisson.atom_count() == 1);
  CHECK_FALSE(poisson.continuous_part());

  const auto empty = validate_levy_spec({0.0, 0.0, {}, false});
  CHECK(empty.atom_count() == 0);
  CHECK(empty.mean_L1() == 0.0);

  CHECK(validate_levy_spec({0.0, 0.5, {}, false}).continuous_part());
}

TEST_CASE("validation rejects malformed atoms") {
  CHECK_ERROR_CODE(validate_levy_spec({0.0, 0.0, {{1.0, 1.0}, {1.0, 2.0}}, false}), ErrorCode::DuplicateJumpSize);
  CHECK_ERROR_CODE(validate_levy_spec({0.0, 0.0, {{0.0, 1.0}}, false}), ErrorCode::ZeroJumpSize);
  CHECK_ERROR_CODE(validate_levy_spec({0.0, 0.0, {{1.0, 0.0}}, false}), ErrorCode::NonpositiveIntensity);
  CHECK_ERROR_CODE(validate_levy_spec({0.0, 0.0, {{1.0, -2.0}}, false}), ErrorCode::NonpositiveIntensity);
  CHECK_ERROR_CODE(validate_levy_spec({0.0, -1.0, {}, false}), ErrorCode::InvalidArgument);
}

TEST_CASE("raw moments are the hand sums") {
  const auto m = levy_moments(validate_levy_spec({0.0, 0.0, {{2.0, 3.0}}, false}), 4);
  CHECK(m.raw_moments[0] == 3.0);
  CHECK(m.raw_moments[1] == 6.0);
  CHECK(m.raw_moments[2] == 12.0);
  CHECK(m.raw_moments[3] == 24.0);
  CHECK(m.raw_moments[4] == 48.0);

  const auto empty = levy_moments(validate_levy_spec({0.0, 0.0, {}, false}), 3);
  for (double v : empty.raw_moments) CHECK(v == 0.0);

  const auto sym = levy_moments(validate_levy_spec({0.0, 0.0, {{1.0, 0.5}, {-1.0, 0.5}}, false}), 2);
  CHECK(sym.raw_moments[1] == 0.0);
  CHECK(sym.raw_moments[2] == 1.0);

  CHECK_ERROR_CODE(levy_moments(validate_levy_spec({0.0, 0.0, {}, false}), 0), ErrorCode::InvalidArgument);
}

TEST_CASE("mean of L_1 under both drift conventions") {
  const std::vector<JumpAtom> atoms{{0.5, 2.0}, {2.0, 1.0}, {-3.0, 0.5}};
  // raw: 0.1 + 1.0 + 2.0 - 1.5
  const auto raw = validate_levy_spec({0.1, 0.0, atoms, false});
  CHECK(raw.mean_L1() == doctest::Approx(1.6));
  CHECK(raw.continuous_drift() == doctest::Approx(0.1));
  // compensated: only |beta| > 1 contributes to the mean, small jumps are compensated
  const auto comp = validate_levy_spec({0.1, 0.0, atoms, true});
  CHECK(comp.mean_L1() == doctest::Approx(0.1 + 2.0 - 1.5));
  CHECK(comp.continuous_drift() == doctest::Approx(0.1 - 1.0));
  CHECK(levy_moments(comp, 1).effective_drift == comp.mean_L1());

  // two-atom reference setup: E[L_1] = 0.1 + 0.5 - 0.6 = 0
  CHECK(validate_levy_spec(testing::example51_levy()).mean_L1() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("even moments positive, odd moments of symmetric sets vanish") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> size(0.05, 3.0), rate(0.01, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    LevySpec spec;
    const int pairs = 1 + trial % 4;
    for (int i = 0; i < pairs; ++i) {
      const double b = size(rng) + i * 3.0;  // keeps sizes distinct
      const double a = rate(rng);
      spec.atoms.push_back({b, a});
      spec.atoms.push_back({-b, a});
    }
    const auto v = validate_levy_spec(spec);
    const auto m = levy_moments(v, 7);
    for (int k = 2; k <= 6; k += 2) CHECK(m.raw_moments[static_cast<std::size_t>(k)] > 0.0);
    for (int k = 1; k <= 7; k += 2) CHECK(m.raw_moments[static_cast<std::size_t>(k)] == 0.0);
    // pure: the validated spec is unchanged and re-validates to the same value
    CHECK(v.spec() == spec);
    CHECK(validate_levy_spec(v.spec()).spec() == spec);
  }
}
