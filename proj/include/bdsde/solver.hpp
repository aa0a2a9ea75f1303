#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bdsde/coefficients.hpp"
#include "bdsde/path_engine.hpp"
#include "bdsde/teugels_basis.hpp"

namespace bdsde {

// Data of the reflected equation in Markovian form: xi = l(X_T), S_t = h(t, X_t).
struct ProblemSpec {
  DriverFn f;
  StateFn phi;
  StateFn g;
  TerminalFn terminal;
  ObstacleFn obstacle;
  double lipschitz_c = 1.0;  // declared c in |f(y1,z1) - f(y2,z2)|^2 <= c(|dy|^2 + |dz|^2)
  double mono_beta = -0.5;   // declared beta < 0 in <y1 - y2, phi(y1) - phi(y2)> <= beta |y1 - y2|^2
  double theta = 1.0;
  bool f_depends_on_z = true;
  bool g_is_zero = false;
  bool g_depends_on_y = true;
};

struct HypothesisReport {
  double worst_lipschitz_ratio = 0.0;   // max |df|^2 / (|dy|^2 + |dz|^2), compared to c
  double worst_noise_ratio = 0.0;       // max |dg|^2 / |dy|^2, compared to c
  double worst_monotonicity = 0.0;      // max <dy, dphi> / |dy|^2, compared to beta
  bool lipschitz_ok = true;
  bool monotone_ok = true;
};

// Spot checks of the declared Lipschitz and monotonicity constants on random
// (t, x, y, z) samples.
HypothesisReport check_hypotheses(const ProblemSpec& problem, double horizon, int z_dim,
                                  std::uint64_t seed, int samples = 2000);

enum class ReflectionMode { Projection, Penalization };

struct SolverConfig {
  std::size_t n_paths = 10000;
  ReflectionMode mode = ReflectionMode::Projection;
  double penalization_n = 64.0;
  int degree = 4;
  bool boundary_indicator = true;
  double boundary_layer = 0.05;  // indicator of |X| >= theta (1 - boundary_layer)
  int outer_b_samples = 1;
  std::uint64_t seed = 20240601;

  int basis_dimension() const noexcept { return degree + 1 + (boundary_indicator ? 1 : 0); }
};

// Throws Error{InvalidArgument} on n_paths < 10 * basis dimension and other
// malformed settings.
void validate_solver_config(const SolverConfig& config);

struct SolutionDiagnostics {
  double y0 = 0.0;
  double y0_se = 0.0;
  double k_T_mean = 0.0;
  double skorokhod_residual = 0.0;
  double penetration_norm = 0.0;
  int regression_fallbacks = 0;  // time steps solved with a reduced polynomial degree
  std::vector<std::string> warnings;
};

struct EnsembleSolution {
  Eigen::MatrixXd Y;                // paths x nodes
  std::vector<Eigen::MatrixXd> Z;   // per Teugels index: paths x nodes, Z at t_N is 0
  Eigen::MatrixXd K;                // paths x nodes, K_0 = 0
  Eigen::MatrixXd S;                // obstacle values h(t_k, X_k)
  Eigen::VectorXd pathwise_y0;      // xi + sum of driver, boundary, noise and push increments
  SolutionDiagnostics diagnostics;
};

// Backward regression scheme on one outer Brownian sample. Throws
// Error{TerminalBelowObstacle} and Error{SingularRegression}.
EnsembleSolution solve_penalized(const ProblemSpec& problem, const SolverConfig& config,
                                 const PathEnsemble& paths);

// mean over paths of sum_k |Y_k - S_k| dK_k
double skorokhod_residual(const EnsembleSolution& sol, const Eigen::MatrixXd& S);

// max_k mean over paths of ((Y_k - S_k)^-)^2
double penetration_norm(const EnsembleSolution& sol, const Eigen::MatrixXd& S);

struct SolveSummary {
  double y0 = 0.0;
  double y0_se = 0.0;
  double k_T_mean = 0.0;
  double skorokhod_residual = 0.0;
  double penetration_norm = 0.0;
  int regression_fallbacks = 0;
  std::vector<double> y0_per_outer;
};

// Simulates config.outer_b_samples ensembles and solves each. Outer samples
// are combined only in the returned scalars.
SolveSummary solve(const ProblemSpec& problem, const SolverConfig& config, const ForwardModel& model,
                   const TeugelsBasis& basis, std::vector<EnsembleSolution>* solutions = nullptr);

// Penalized solutions on identical paths, one per n in `schedule`.
std::vector<EnsembleSolution> solve_family(const ProblemSpec& problem, const SolverConfig& config,
                                           const PathEnsemble& paths, const std::vector<double>& schedule);

struct BoundEntry {
  double n = 0.0;
  double sup_y2 = 0.0;     // E sup_t |Y_t|^2
  double int_y2_dA = 0.0;  // E int |Y|^2 dA
  double int_z2_dt = 0.0;  // E int ||Z||^2 dt
  double k_T2 = 0.0;       // E |K_T|^2
  double total = 0.0;
};

struct BoundReport {
  std::vector<BoundEntry> entries;
  double sup_total = 0.0;
  bool bounded = true;  // last total <= (1 + plateau_tol) * previous total
};

BoundReport apriori_bounds(const std::vector<EnsembleSolution>& family,
                           const std::vector<double>& schedule, const PathEnsemble& paths,
                           double plateau_tol = 0.05);

struct ComparisonReport {
  double min_jump_sum = 0.0;  // min over (path, step) of sum_i beta^i dH^i
  double max_abs_beta = 0.0;
  std::size_t violations = 0;  // entries with sum <= -1
  bool hypothesis_holds = true;
};

// Difference quotients beta^i_k of f1 along the coordinate path from Z^1 to Z^2.
ComparisonReport check_comparison_hypothesis(const ProblemSpec& problem1, const EnsembleSolution& sol1,
                                             const EnsembleSolution& sol2, const PathEnsemble& paths);

// Fraction of (path, node) pairs with Y1 < Y2 - tol.
double ordering_violation_fraction(const EnsembleSolution& sol1, const EnsembleSolution& sol2, double tol);

}  // namespace bdsde
