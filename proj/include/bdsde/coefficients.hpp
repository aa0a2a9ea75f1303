#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bdsde/path_engine.hpp"

namespace bdsde {

using DriverFn = std::function<double(double t, double x, double y, std::span<const double> z)>;
using StateFn = std::function<double(double t, double x, double y)>;
using TerminalFn = std::function<double(double x)>;
using ObstacleFn = std::function<double(double t, double x)>;

// A built-in coefficient selected by name plus its numeric parameters,
// written in config files as e.g. `linear 0 -0.1 0`.
struct CoefficientChoice {
  std::string name;
  std::vector<double> params;

  bool operator==(const CoefficientChoice&) const = default;
};

std::string format_choice(const CoefficientChoice& choice);

struct DriverCoefficient {
  DriverFn fn;
  bool depends_on_z = false;
};

struct StateCoefficient {
  StateFn fn;
  bool is_zero = false;
  bool depends_on_y = false;
};

// Registries. Unknown names throw Error{UnknownCoefficientName}; a wrong
// parameter count throws Error{InvalidArgument}.
//
//   driver f(t,x,y,z) : zero | constant a | linear a b c  (a + b y + c z_1) | example51  (-0.1 y)
//   boundary phi      : zero | constant a | linear a b    (a + b y)         | example51  (-0.5 y)
//   noise g           : zero | constant a | linear a b    (a + b y)         | example51  (0)
//   terminal l(x)     : constant c | linear a b (a + b x) | call k (max(x-k,0)) | example51 (max(x,0))
//   obstacle h(t,x)   : none | constant c | linear a bt bx (a + bt t + bx x)
//                       | example51 (0.2 max(x,0) - 0.05)
//   sigma_x(x)        : constant s | linear a b (a + b x) | example51 (1)
DriverCoefficient make_driver(const CoefficientChoice& choice);
StateCoefficient make_boundary(const CoefficientChoice& choice);
StateCoefficient make_noise(const CoefficientChoice& choice);
TerminalFn make_terminal(const CoefficientChoice& choice);
ObstacleFn make_obstacle(const CoefficientChoice& choice);
ForwardCoefficient make_sigma_x(const CoefficientChoice& choice);

// Obstacle value standing in for "no obstacle".
inline constexpr double kNoObstacle = -1e9;

}  // namespace bdsde
