#include "bdsde/time_grid.hpp"

#include <cmath>

#include "bdsde/errors.hpp"

namespace bdsde {

TimeGrid::TimeGrid(double horizon, int n_steps) : horizon_(horizon), n_steps_(n_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidArgument, "time horizon must be finite and > 0");
  }
  if (n_steps < 1) throw Error(ErrorCode::InvalidArgument, "n_steps must be >= 1");
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(n_nodes());
  for (int k = 0; k <= n_steps_; ++k) out[static_cast<std::size_t>(k)] = t(k);
  return out;
}

}  // namespace bdsde
