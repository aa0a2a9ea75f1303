#pragma once

#include <cstddef>
#include <vector>

namespace bdsde {

// Uniform grid t_k = k T / n, k = 0..n.
class TimeGrid {
 public:
  TimeGrid(double horizon, int n_steps);

  double horizon() const noexcept { return horizon_; }
  int n_steps() const noexcept { return n_steps_; }
  std::size_t n_nodes() const noexcept { return static_cast<std::size_t>(n_steps_) + 1; }
  double dt() const noexcept { return horizon_ / n_steps_; }
  // Exact at k = n_steps.
  double t(int k) const noexcept {
    return k == n_steps_ ? horizon_ : horizon_ * static_cast<double>(k) / n_steps_;
  }
  std::vector<double> nodes() const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  int n_steps_;
};

struct JumpEvent {
  int step = 0;       // jump occurred in (t_step, t_{step+1}]
  double time = 0.0;
  double size = 0.0;
  int atom = 0;       // index into the Levy spec atoms
};

// One Levy path on a grid: node values and an exhaustive jump record sorted by time.
struct LevyPath {
  std::vector<double> L;
  std::vector<JumpEvent> jumps;
};

}  // namespace bdsde
