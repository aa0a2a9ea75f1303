#include "bdsde/coefficients.hpp"

#include <algorithm>
#include <sstream>

#include "bdsde/errors.hpp"

namespace bdsde {
namespace {

void expect_params(const CoefficientChoice& c, std::size_t n, const char* kind) {
  if (c.params.size() != n) {
    std::ostringstream msg;
    msg << kind << " '" << c.name << "' takes " << n << " parameter(s), got " << c.params.size();
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
}

[[noreturn]] void unknown(const CoefficientChoice& c, const char* kind) {
  throw Error(ErrorCode::UnknownCoefficientName, std::string(kind) + " '" + c.name + "'");
}

}  // namespace

std::string format_choice(const CoefficientChoice& choice) {
  std::ostringstream out;
  out.precision(17);
  out << choice.name;
  for (double p : choice.params) out << ' ' << p;
  return out.str();
}

DriverCoefficient make_driver(const CoefficientChoice& c) {
  constexpr const char* kind = "driver";
  if (c.name == "zero") {
    expect_params(c, 0, kind);
    return {[](double, double, double, std::span<const double>) { return 0.0; }, false};
  }
  if (c.name == "constant") {
    expect_params(c, 1, kind);
    const double a = c.params[0];
    return {[a](double, double, double, std::span<const double>) { return a; }, false};
  }
  if (c.name == "linear") {
    expect_params(c, 3, kind);
    const double a = c.params[0], b = c.params[1], cz = c.params[2];
    return {[a, b, cz](double, double, double y, std::span<const double> z) {
              return a + b * y + (z.empty() ? 0.0 : cz * z[0]);
            },
            cz != 0.0};
  }
  if (c.name == "example51") {
    expect_params(c, 0, kind);
    return {[](double, double, double y, std::span<const double>) { return -0.1 * y; }, false};
  }
  unknown(c, kind);
}

namespace {

StateCoefficient make_state(const CoefficientChoice& c, const char* kind, double example_slope) {
  if (c.name == "zero") {
    expect_params(c, 0, kind);
    return {[](double, double, double) { return 0.0; }, true, false};
  }
  if (c.name == "constant") {
    expect_params(c, 1, kind);
    const double a = c.params[0];
    return {[a](double, double, double) { return a; }, a == 0.0, false};
  }
  if (c.name == "linear") {
    expect_params(c, 2, kind);
    const double a = c.params[0], b = c.params[1];
    return {[a, b](double, double, double y) { return a + b * y; }, a == 0.0 && b == 0.0, b != 0.0};
  }
  if (c.name == "example51") {
    expect_params(c, 0, kind);
    const double b = example_slope;
    return {[b](double, double, double y) { return b * y; }, b == 0.0, b != 0.0};
  }
  unknown(c, kind);
}

}  // namespace

StateCoefficient make_boundary(const CoefficientChoice& c) { return make_state(c, "boundary", -0.5); }

StateCoefficient make_noise(const CoefficientChoice& c) { return make_state(c, "noise", 0.0); }

TerminalFn make_terminal(const CoefficientChoice& c) {
  constexpr const char* kind = "terminal";
  if (c.name == "constant") {
    expect_params(c, 1, kind);
    const double v = c.params[0];
    return [v](double) { return v; };
  }
  if (c.name == "linear") {
    expect_params(c, 2, kind);
    const double a = c.params[0], b = c.params[1];
    return [a, b](double x) { return a + b * x; };
  }
  if (c.name == "call") {
    expect_params(c, 1, kind);
    const double k = c.params[0];
    return [k](double x) { return std::max(x - k, 0.0); };
  }
  if (c.name == "example51") {
    expect_params(c, 0, kind);
    return [](double x) { return std::max(x, 0.0); };
  }
  unknown(c, kind);
}

ObstacleFn make_obstacle(const CoefficientChoice& c) {
  constexpr const char* kind = "obstacle";
  if (c.name == "none") {
    expect_params(c, 0, kind);
    return [](double, double) { return kNoObstacle; };
  }
  if (c.name == "constant") {
    expect_params(c, 1, kind);
    const double v = c.params[0];
    return [v](double, double) { return v; };
  }
  if (c.name == "linear") {
    expect_params(c, 3, kind);
    const double a = c.params[0], bt = c.params[1], bx = c.params[2];
    return [a, bt, bx](double t, double x) { return a + bt * t + bx * x; };
  }
  if (c.name == "example51") {
    expect_params(c, 0, kind);
    return [](double, double x) { return 0.2 * std::max(x, 0.0) - 0.05; };
  }
  unknown(c, kind);
}

ForwardCoefficient make_sigma_x(const CoefficientChoice& c) {
  constexpr const char* kind = "sigma_x";
  if (c.name == "constant") {
    expect_params(c, 1, kind);
    const double s = c.params[0];
    return [s](double) { return s; };
  }
  if (c.name == "linear") {
    expect_params(c, 2, kind);
    const double a = c.params[0], b = c.params[1];
    return [a, b](double x) { return a + b * x; };
  }
  if (c.name == "example51") {
    expect_params(c, 0, kind);
    return [](double) { return 1.0; };
  }
  unknown(c, kind);
}

}  // namespace bdsde
