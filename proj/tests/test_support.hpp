#pragma once

#include <doctest.h>

#include "bdsde/coefficients.hpp"
#include "bdsde/errors.hpp"
#include "bdsde/solver.hpp"

namespace bdsde::testing {

#define CHECK_ERROR_CODE(expr, expected_code)                  \
  do {                                                         \
    bool thrown_ = false;                                      \
    try {                                                      \
      (void)(expr);                                            \
    } catch (const ::bdsde::Error& e_) {                       \
      thrown_ = true;                                          \
      CHECK_MESSAGE(e_.code() == (expected_code), e_.what()); \
    }                                                          \
    CHECK_MESSAGE(thrown_, "no bdsde::Error thrown");          \
  } while (0)

inline ProblemSpec registry_problem(const CoefficientChoice& f, const CoefficientChoice& phi, const CoefficientChoice& g,
                                    const CoefficientChoice& l, const CoefficientChoice& h, double theta = 1.0) {
  const auto fd = make_driver(f);
  const auto pd = make_boundary(phi);
  const auto gd = make_noise(g);
  ProblemSpec p;
  p.f = fd.fn;
  p.phi = pd.fn;
  p.g = gd.fn;
  p.terminal = make_terminal(l);
  p.obstacle = make_obstacle(h);
  p.theta = theta;
  p.f_depends_on_z = fd.depends_on_z;
  p.g_is_zero = gd.is_zero;
  p.g_depends_on_y = gd.depends_on_y;
  return p;
}

// f = g = phi = 0, l = 0, h(t, x) = 1 - t
inline ProblemSpec deterministic_obstacle() {
  return registry_problem({"zero", {}}, {"zero", {}}, {"zero", {}}, {"constant", {0.0}}, {"linear", {1.0, -1.0, 0.0}});
}

inline ProblemSpec example51_problem() {
  return registry_problem({"example51", {}}, {"example51", {}}, {"example51", {}}, {"example51", {}},
                          {"example51", {}});
}

inline LevySpec example51_levy() { return LevySpec{0.1, 0.0, {{0.5, 1.0}, {-0.4, 1.5}}, false}; }

inline ForwardModel forward_model(const LevySpec& spec, double horizon, int n_steps, double x0 = 0.0,
                                  double theta = 1.0) {
  return ForwardModel{validate_levy_spec(spec), TimeGrid(horizon, n_steps), theta, x0,
                      [](double) { return 1.0; }, AMode::LocalTime, {}};
}

}  // namespace bdsde::testing
