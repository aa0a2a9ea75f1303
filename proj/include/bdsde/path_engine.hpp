#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bdsde/levy_model.hpp"
#include "bdsde/teugels_basis.hpp"
#include "bdsde/time_grid.hpp"

namespace bdsde {

// sigma(x) in dX = sigma(X_-) dL + d eta
using ForwardCoefficient = std::function<double(double)>;

// e(-theta) = 1, e(theta) = -1, 0 in the interior.
inline int boundary_direction(double x, double theta) noexcept {
  if (x <= -theta) return 1;
  if (x >= theta) return -1;
  return 0;
}

struct ReflectedPath {
  std::vector<double> X;         // in [-theta, theta]
  std::vector<double> eta_abs;   // |eta|, nondecreasing, eta_abs[0] = 0
  std::vector<int> eta_sign;     // e(X_{k+1}) where |eta| increased on step k, else 0; size n_steps
};

enum class AMode { IdentityTime, LocalTime, UserTable };

struct ForwardModel {
  ValidatedLevySpec levy;
  TimeGrid grid;
  double theta = 1.0;
  double x0 = 0.0;
  ForwardCoefficient sigma_x = [](double) { return 1.0; };
  AMode a_mode = AMode::LocalTime;
  std::vector<double> a_table;  // UserTable mode only, one value per node
};

struct PathBundle {
  TimeGrid grid;
  std::vector<double> B;
  std::vector<double> L;
  std::vector<JumpEvent> jump_record;
  std::vector<double> X;
  std::vector<double> eta_abs;
  std::vector<int> eta_sign;
  std::vector<double> A;
  TeugelsIncrements dH;
};

// B_0 = 0 and iid N(0, dt) increments.
std::vector<double> simulate_brownian(const TimeGrid& grid, std::uint64_t seed);

// Per atom: Poisson(alpha T) jumps at iid uniform times. Node values add the
// drift of the chosen representation and, when sigma > 0, sigma times an
// independent Brownian motion drawn from the same stream.
LevyPath simulate_levy(const ValidatedLevySpec& spec, const TimeGrid& grid, std::uint64_t seed);

// Projected Euler scheme: X~ = X_k + sigma(X_k) dL_k, X_{k+1} = clamp(X~),
// d|eta|_k = |X~ - X_{k+1}|. Throws Error{InitialPointOutsideDomain}.
ReflectedPath simulate_reflected_x(const ForwardCoefficient& sigma_x, double theta, double x0,
                                   std::span<const double> L);

// Throws Error{NonMonotoneUserTable}.
std::vector<double> assemble_A(AMode mode, const TimeGrid& grid, const ReflectedPath& reflected,
                               std::span<const double> user_table = {});

// One complete scenario. `brownian` is the (shared) B path of the outer sample.
PathBundle simulate_path(const ForwardModel& model, const TeugelsBasis& basis,
                         std::vector<double> brownian, std::uint64_t levy_seed);

// Paths of one outer Brownian sample in [path x node] layout.
struct PathEnsemble {
  TimeGrid grid;
  std::vector<double> B;
  Eigen::MatrixXd X;                // paths x nodes
  Eigen::MatrixXd A;                // paths x nodes
  std::vector<Eigen::MatrixXd> dH;  // per Teugels index: paths x steps
  int basis_rank = 0;

  Eigen::Index n_paths() const noexcept { return X.rows(); }
};

// Path p of outer sample `outer` uses levy_seed(master, outer, p), so the
// ensemble does not depend on how paths are scheduled across threads.
PathEnsemble simulate_ensemble(const ForwardModel& model, const TeugelsBasis& basis,
                               std::size_t n_paths, std::uint64_t master_seed,
                               std::uint64_t outer_index = 0);

// sum_k (X_{k+1} - V_{k+1}) n(X_{k+1}) d|eta|_k with outward normal n = -e.
// Nonnegative for every V with values in [-theta, theta].
double skorokhod_pairing(const ReflectedPath& reflected, std::span<const double> V, double theta);

}  // namespace bdsde
