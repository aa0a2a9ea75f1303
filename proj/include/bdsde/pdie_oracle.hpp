#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bdsde/path_engine.hpp"
#include "bdsde/solver.hpp"
#include "bdsde/teugels_basis.hpp"

namespace bdsde {

struct PidieGridSpec {
  int space_intervals = 200;  // J; nodes x_0 = -theta, ..., x_J = theta
  int time_steps = 400;       // M
};

// Jump targets x_j + sigma(x_j) beta_i, clamped to [-theta, theta] and read by
// linear interpolation. The clamped-off part of the jump (overshoot) is the
// local-time push of the path engine and is charged to phi at the boundary.
class NonlocalStencil {
 public:
  struct Entry {
    int left = 0;           // interpolation interval [x_left, x_left+1]
    double w_left = 1.0;
    double w_right = 0.0;
    double overshoot = 0.0;  // |unclamped target - clamped target|
    int side = 0;            // -1 clamped at -theta, +1 clamped at theta
  };

  NonlocalStencil(const std::vector<double>& x, double theta, const ForwardCoefficient& sigma_x,
                  const std::vector<JumpAtom>& atoms);

  const Entry& entry(int node, int atom) const {
    return entries_[static_cast<std::size_t>(node) * n_atoms_ + static_cast<std::size_t>(atom)];
  }
  std::size_t n_atoms() const noexcept { return n_atoms_; }
  std::size_t n_nodes() const noexcept { return n_nodes_; }

  double interpolate(int node, int atom, const Eigen::Ref<const Eigen::VectorXd>& u) const {
    const Entry& e = entry(node, atom);
    return e.w_right == 0.0 ? e.w_left * u(e.left) : e.w_left * u(e.left) + e.w_right * u(e.left + 1);
  }

 private:
  std::size_t n_nodes_;
  std::size_t n_atoms_;
  std::vector<Entry> entries_;
};

struct PidieGrid {
  double theta = 1.0;
  double horizon = 1.0;
  std::vector<double> x;  // J + 1 nodes
  std::vector<double> t;  // M + 1 nodes
  Eigen::MatrixXd u;      // (M + 1) x (J + 1), row k is u(t_k, .)
  double boundary_residual = 0.0;  // max |Neumann row residual| over all solves

  int space_intervals() const noexcept { return static_cast<int>(x.size()) - 1; }
  int time_steps() const noexcept { return static_cast<int>(t.size()) - 1; }
  double dx() const noexcept { return 2.0 * theta / space_intervals(); }
  double dt() const noexcept { return horizon / time_steps(); }
  // Linear interpolation in x on time row `k`, x clamped to the domain.
  double value(int k, double xq) const;
  // Central difference of the interpolant (one-sided at the ends).
  double dudx(int k, double xq) const;
};

enum class OracleMode { Deterministic, Pathwise };

// Backward time stepping on the obstacle problem with Neumann boundary:
//   explicit : f(t_{k+1}, x, u, (u^(i))_i), the jump term, g(t_k, x) dB_k (pathwise mode)
//   implicit : upwind transport sigma(x) c du/dx, c = drift of L between jumps,
//              boundary rows closed by the ghost value from e du/dx + phi(u) = 0
//   then u <- max(u, h).
// In Pathwise mode `brownian` holds B on the oracle's time nodes and g must not
// depend on y. Throws Error{CFLViolation | BisectionFailure | InvalidArgument}.
PidieGrid solve_obstacle_pidie(const ProblemSpec& problem, const ForwardModel& model, const TeugelsBasis& basis,
                               const PidieGridSpec& spec, OracleMode mode = OracleMode::Deterministic,
                               std::span<const double> brownian = {});

// max over nodes of |min(u - h, R)| / (1 + |u|), R the discrete operator
// residual recomputed from the stored grid.
double complementarity_defect(const PidieGrid& grid, const ProblemSpec& problem, const ForwardModel& model,
                              const TeugelsBasis& basis, OracleMode mode = OracleMode::Deterministic,
                              std::span<const double> brownian = {});

// Z^(i)(t_k, x) = sum_j alpha_j u^1(t_k, x, beta_j) p_i(beta_j)
//               + [i = 1] sigma(x) du/dx (int y^2 nu(dy))^{1/2}
// with u^1(t, x, y) = u(t, x + sigma(x) y) - u(t, x) - sigma(x) y du/dx, the
// target value continued beyond the boundary through phi.
std::vector<double> representation_z(const PidieGrid& grid, int k, double x, const TeugelsBasis& basis,
                                     const ForwardModel& model, const ProblemSpec& problem);

// Same quantity without the gradient split:
//   sum_j alpha_j [u_ext(t_k, x + sigma(x) beta_j) - u(t_k, x)] p_i(beta_j).
std::vector<double> jump_covariation_z(const PidieGrid& grid, int k, double x, const TeugelsBasis& basis,
                                       const ForwardModel& model, const ProblemSpec& problem);

struct H1NormalizationRow {
  double jump_size = 0.0;
  double intensity = 0.0;
  double gram_schmidt = 0.0;  // jump of H^(1) at beta: c_{1,1} beta
  double closed_form = 0.0;   // beta / sqrt(alpha)
  double ratio = 0.0;         // closed_form / gram_schmidt
};

struct FkReport {
  std::string note;
  double y0_mc = 0.0;
  double y0_se = 0.0;
  double u0_fd = 0.0;
  double y0_abs_diff = 0.0;
  double max_abs_y_err = 0.0;
  double rms_y_err = 0.0;
  std::size_t samples = 0;
  std::vector<double> z_rms_err;  // per Teugels index <= rank
  std::vector<double> z_max_err;
  std::vector<double> z_rms_mc;
  std::vector<H1NormalizationRow> h1_normalization;
};

// Compares the regression solution with u on the sampled (t_k, X_k) nodes.
// Throws Error{GridIncompatible} unless the oracle grid refines the path grid
// in time and covers the same domain.
FkReport representation_check(const PidieGrid& grid, const TeugelsBasis& basis, const ForwardModel& model,
                              const ProblemSpec& problem, const EnsembleSolution& mc, const PathEnsemble& paths,
                              std::size_t max_samples = 20000);

void write_u_grid_csv(std::ostream& out, const PidieGrid& grid);
void write_fk_report_csv(std::ostream& out, const FkReport& report);

}  // namespace bdsde
