#include "bdsde/pdie_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "bdsde/errors.hpp"

namespace bdsde {

NonlocalStencil::NonlocalStencil(const std::vector<double>& x, double theta, const ForwardCoefficient& sigma_x,
                                 const std::vector<JumpAtom>& atoms)
    : n_nodes_(x.size()), n_atoms_(atoms.size()) {
  if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, "stencil needs at least two nodes");
  const int J = static_cast<int>(x.size()) - 1;
  const double dx = 2.0 * theta / J;
  entries_.resize(n_nodes_ * n_atoms_);
  for (int j = 0; j <= J; ++j) {
    const double s = sigma_x(x[static_cast<std::size_t>(j)]);
    for (std::size_t a = 0; a < n_atoms_; ++a) {
      const double target = x[static_cast<std::size_t>(j)] + s * atoms[a].size;
      const double clamped = std::clamp(target, -theta, theta);
      Entry e;
      e.overshoot = std::abs(target - clamped);
      e.side = target > theta ? 1 : (target < -theta ? -1 : 0);
      const double pos = (clamped + theta) / dx;
      // Snap to a node when the target is on the grid up to round-off.
      const double nearest = std::round(pos);
      if (std::abs(pos - nearest) < 1e-9) {
        e.left = static_cast<int>(nearest);
        e.w_left = 1.0;
        e.w_right = 0.0;
      } else {
        e.left = std::clamp(static_cast<int>(std::floor(pos)), 0, J - 1);
        e.w_right = pos - e.left;
        e.w_left = 1.0 - e.w_right;
      }
      entries_[static_cast<std::size_t>(j) * n_atoms_ + a] = e;
    }
  }
}

double PidieGrid::value(int k, double xq) const {
  const int J = space_intervals();
  const double pos = (std::clamp(xq, -theta, theta) + theta) / dx();
  const int left = std::clamp(static_cast<int>(std::floor(pos)), 0, J - 1);
  const double w = std::clamp(pos - left, 0.0, 1.0);
  return (1.0 - w) * u(k, left) + w * u(k, left + 1);
}

double PidieGrid::dudx(int k, double xq) const {
  const double h = dx();
  const double lo = std::max(xq - h, -theta);
  const double hi = std::min(xq + h, theta);
  return (value(k, hi) - value(k, lo)) / (hi - lo);
}

namespace {

struct BoundaryRow {
  double diag;     // coefficient of the boundary unknown
  double coupled;  // coefficient of its neighbour (moved to the right side)
  double phi_weight;  // dt * outward velocity, multiplies phi(u_b)
};

// Root of diag * u - phi_weight * phi(u) = rhs by bracketing and bisection.
double solve_boundary_row(double diag, double phi_weight, double rhs, const std::function<double(double)>& phi,
                          double guess) {
  auto F = [&](double u) { return diag * u - phi_weight * phi(u) - rhs; };
  if (phi_weight == 0.0) return rhs / diag;
  double lo = guess - (1.0 + std::abs(guess)), hi = guess + (1.0 + std::abs(guess));
  double flo = F(lo), fhi = F(hi);
  for (int it = 0; it < 80 && flo * fhi > 0.0; ++it) {
    const double w = hi - lo;
    lo -= w;
    hi += w;
    flo = F(lo);
    fhi = F(hi);
  }
  if (flo * fhi > 0.0 || !std::isfinite(flo) || !std::isfinite(fhi)) {
    throw Error(ErrorCode::BisectionFailure, "no sign change for the Neumann boundary equation");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = F(mid);
    if (fm == 0.0 || hi - lo <= 1e-15 * (1.0 + std::abs(mid))) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Shared discretization used by the solve and by the post-hoc residual.
class Stepper {
 public:
  Stepper(const ProblemSpec& problem, const ForwardModel& model, const TeugelsBasis& basis,
          const std::vector<double>& x, double dt)
      : problem_(problem),
        model_(model),
        basis_(basis),
        x_(x),
        dt_(dt),
        theta_(model.theta),
        stencil_(x, model.theta, model.sigma_x, model.levy.atoms()) {
    const int J = static_cast<int>(x.size()) - 1;
    const double dx = 2.0 * theta_ / J;
    const double drift = model.levy.continuous_drift();
    lam_plus_.resize(J + 1);
    lam_minus_.resize(J + 1);
    for (int j = 0; j <= J; ++j) {
      const double v = model.sigma_x(x[static_cast<std::size_t>(j)]) * drift;
      lam_plus_(j) = dt * std::max(v, 0.0) / dx;
      lam_minus_(j) = dt * std::max(-v, 0.0) / dx;
    }
    const auto& atoms = model.levy.atoms();
    p_values_.resize(static_cast<Eigen::Index>(atoms.size()), basis.requested());
    p_values_.setZero();
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      for (int i = 1; i <= basis.rank(); ++i) p_values_(static_cast<Eigen::Index>(a), i - 1) = basis.p(i, atoms[a].size);
    }
    z_.assign(static_cast<std::size_t>(basis.requested()), 0.0);
  }

  // u^{k+1} + dt [f + jump term] + g dB
  Eigen::VectorXd explicit_rhs(double t_next, double t_now, const Eigen::VectorXd& u_next, double dB) {
    const int J = static_cast<int>(x_.size()) - 1;
    const auto& atoms = model_.levy.atoms();
    const double phi_lo = problem_.phi(t_next, -theta_, u_next(0));
    const double phi_hi = problem_.phi(t_next, theta_, u_next(J));
    Eigen::VectorXd rhs(J + 1);
    for (int j = 0; j <= J; ++j) {
      const double uj = u_next(j);
      double jump_term = 0.0;
      std::fill(z_.begin(), z_.end(), 0.0);
      for (std::size_t a = 0; a < atoms.size(); ++a) {
        const auto& e = stencil_.entry(j, static_cast<int>(a));
        double target = stencil_.interpolate(j, static_cast<int>(a), u_next);
        if (e.side > 0) target += phi_hi * e.overshoot;
        if (e.side < 0) target += phi_lo * e.overshoot;
        const double diff = atoms[a].intensity * (target - uj);
        jump_term += diff;
        if (problem_.f_depends_on_z) {
          for (int i = 0; i < basis_.rank(); ++i) z_[static_cast<std::size_t>(i)] += diff * p_values_(static_cast<Eigen::Index>(a), i);
        }
      }
      const double xj = x_[static_cast<std::size_t>(j)];
      rhs(j) = uj + dt_ * (problem_.f(t_next, xj, uj, z_) + jump_term);
      if (dB != 0.0) rhs(j) += problem_.g(t_now, xj, uj) * dB;
    }
    return rhs;
  }

  // Left side of the implicit rows applied to u.
  Eigen::VectorXd apply_rows(double t_now, const Eigen::VectorXd& u) const {
    const int J = static_cast<int>(u.size()) - 1;
    Eigen::VectorXd out(J + 1);
    for (int j = 0; j <= J; ++j) {
      double value = (1.0 + lam_plus_(j) + lam_minus_(j)) * u(j);
      if (j < J) value -= lam_plus_(j) * u(j + 1);
      if (j > 0) value -= lam_minus_(j) * u(j - 1);
      out(j) = value;
    }
    // Ghost closures: outward transport at a boundary becomes the phi term.
    const double dx = 2.0 * theta_ / J;
    out(0) -= lam_minus_(0) * u(0);
    out(0) -= lam_minus_(0) * dx * problem_.phi(t_now, -theta_, u(0));
    out(J) -= lam_plus_(J) * u(J);
    out(J) -= lam_plus_(J) * dx * problem_.phi(t_now, theta_, u(J));
    return out;
  }

  // Solves apply_rows(u) = rhs; returns the max boundary row residual.
  double implicit_solve(double t_now, const Eigen::VectorXd& rhs, const Eigen::VectorXd& guess, Eigen::VectorXd& u) const {
    const int J = static_cast<int>(rhs.size()) - 1;
    const double dx = 2.0 * theta_ / J;
    Eigen::VectorXd a(J + 1), b(J + 1), c(J + 1), d(J + 1);
    for (int j = 0; j <= J; ++j) {
      a(j) = j > 0 ? -lam_minus_(j) : 0.0;
      c(j) = j < J ? -lam_plus_(j) : 0.0;
      b(j) = 1.0 + lam_plus_(j) + lam_minus_(j);
    }
    b(0) -= lam_minus_(0);
    b(J) -= lam_plus_(J);
    const double w_lo = lam_minus_(0) * dx;  // dt * outward speed at -theta
    const double w_hi = lam_plus_(J) * dx;
    auto phi_lo = [&](double v) { return problem_.phi(t_now, -theta_, v); };
    auto phi_hi = [&](double v) { return problem_.phi(t_now, theta_, v); };

    double ghost_lo = w_lo > 0.0 ? phi_lo(guess(0)) : 0.0;
    double ghost_hi = w_hi > 0.0 ? phi_hi(guess(J)) : 0.0;
    u = guess;
    for (int iter = 0; iter < 200; ++iter) {
      d = rhs;
      d(0) += w_lo * ghost_lo;
      d(J) += w_hi * ghost_hi;
      thomas(a, b, c, d, u);
      if (w_lo == 0.0 && w_hi == 0.0) return 0.0;
      const double u0 = solve_boundary_row(b(0), w_lo, rhs(0) + lam_plus_(0) * u(1), phi_lo, u(0));
      const double uJ = solve_boundary_row(b(J), w_hi, rhs(J) + lam_minus_(J) * u(J - 1), phi_hi, u(J));
      const double new_lo = w_lo > 0.0 ? phi_lo(u0) : 0.0;
      const double new_hi = w_hi > 0.0 ? phi_hi(uJ) : 0.0;
      const bool converged = std::abs(new_lo - ghost_lo) <= 1e-14 * (1.0 + std::abs(new_lo)) &&
                             std::abs(new_hi - ghost_hi) <= 1e-14 * (1.0 + std::abs(new_hi));
      ghost_lo = new_lo;
      ghost_hi = new_hi;
      if (converged) {
        const Eigen::VectorXd lhs = apply_rows(t_now, u);
        return std::max(std::abs(lhs(0) - rhs(0)), std::abs(lhs(J) - rhs(J)));
      }
    }
    throw Error(ErrorCode::BisectionFailure, "Neumann boundary iteration did not converge");
  }

 private:
  static void thomas(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                     const Eigen::VectorXd& d, Eigen::VectorXd& x) {
    const Eigen::Index n = d.size();
    Eigen::VectorXd cp(n), dp(n);
    cp(0) = c(0) / b(0);
    dp(0) = d(0) / b(0);
    for (Eigen::Index i = 1; i < n; ++i) {
      const double m = b(i) - a(i) * cp(i - 1);
      cp(i) = c(i) / m;
      dp(i) = (d(i) - a(i) * dp(i - 1)) / m;
    }
    x.resize(n);
    x(n - 1) = dp(n - 1);
    for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = dp(i) - cp(i) * x(i + 1);
  }

  const ProblemSpec& problem_;
  const ForwardModel& model_;
  const TeugelsBasis& basis_;
  const std::vector<double>& x_;
  double dt_;
  double theta_;
  NonlocalStencil stencil_;
  Eigen::VectorXd lam_plus_, lam_minus_;
  Eigen::MatrixXd p_values_;
  std::vector<double> z_;
};

void check_oracle_inputs(const ProblemSpec& problem, const ForwardModel& model, const PidieGridSpec& spec,
                         OracleMode mode, std::span<const double> brownian) {
  if (spec.space_intervals < 2 || spec.time_steps < 1) {
    throw Error(ErrorCode::InvalidArgument, "oracle grid needs >= 2 space intervals and >= 1 time step");
  }
  if (model.levy.continuous_part()) {
    throw Error(ErrorCode::InvalidArgument, "the finite-difference oracle supports Levy drivers without Brownian part only");
  }
  if (std::abs(problem.theta - model.theta) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "problem and forward model disagree on theta");
  }
  const double dt = model.grid.horizon() / spec.time_steps;
  if (dt * model.levy.total_intensity() > 1.0) {
    std::ostringstream msg;
    msg << "dt * sum(alpha) = " << dt * model.levy.total_intensity() << " > 1";
    throw Error(ErrorCode::CflViolation, msg.str());
  }
  if (mode == OracleMode::Deterministic && !problem.g_is_zero) {
    throw Error(ErrorCode::InvalidArgument, "deterministic oracle mode requires g = 0");
  }
  if (mode == OracleMode::Pathwise) {
    if (problem.g_depends_on_y) throw Error(ErrorCode::InvalidArgument, "pathwise oracle mode requires g independent of y");
    if (brownian.size() != static_cast<std::size_t>(spec.time_steps) + 1) {
      throw Error(ErrorCode::InvalidArgument, "pathwise oracle mode needs B on every oracle time node");
    }
  }
}

std::vector<double> space_nodes(double theta, int J) {
  std::vector<double> x(static_cast<std::size_t>(J) + 1);
  for (int j = 0; j <= J; ++j) x[static_cast<std::size_t>(j)] = -theta + 2.0 * theta * j / J;
  x.back() = theta;
  return x;
}

}  // namespace

PidieGrid solve_obstacle_pidie(const ProblemSpec& problem, const ForwardModel& model, const TeugelsBasis& basis,
                               const PidieGridSpec& spec, OracleMode mode, std::span<const double> brownian) {
  check_oracle_inputs(problem, model, spec, mode, brownian);
  const TimeGrid time(model.grid.horizon(), spec.time_steps);
  const int J = spec.space_intervals;
  const int M = spec.time_steps;

  PidieGrid grid;
  grid.theta = model.theta;
  grid.horizon = time.horizon();
  grid.x = space_nodes(model.theta, J);
  grid.t = time.nodes();
  grid.u.resize(M + 1, J + 1);
  for (int j = 0; j <= J; ++j) grid.u(M, j) = problem.terminal(grid.x[static_cast<std::size_t>(j)]);

  Stepper stepper(problem, model, basis, grid.x, time.dt());
  Eigen::VectorXd u_next = grid.u.row(M).transpose();
  Eigen::VectorXd u_now(J + 1);
  for (int k = M - 1; k >= 0; --k) {
    const double dB = mode == OracleMode::Pathwise
                          ? brownian[static_cast<std::size_t>(k) + 1] - brownian[static_cast<std::size_t>(k)]
                          : 0.0;
    const Eigen::VectorXd rhs = stepper.explicit_rhs(time.t(k + 1), time.t(k), u_next, dB);
    grid.boundary_residual = std::max(grid.boundary_residual, stepper.implicit_solve(time.t(k), rhs, u_next, u_now));
    for (int j = 0; j <= J; ++j) u_now(j) = std::max(u_now(j), problem.obstacle(time.t(k), grid.x[static_cast<std::size_t>(j)]));
    grid.u.row(k) = u_now.transpose();
    u_next = u_now;
  }
  return grid;
}

double complementarity_defect(const PidieGrid& grid, const ProblemSpec& problem, const ForwardModel& model,
                              const TeugelsBasis& basis, OracleMode mode, std::span<const double> brownian) {
  const int M = grid.time_steps();
  const double dt = grid.dt();
  Stepper stepper(problem, model, basis, grid.x, dt);
  double worst = 0.0;
  for (int k = M - 1; k >= 0; --k) {
    const double dB = mode == OracleMode::Pathwise
                          ? brownian[static_cast<std::size_t>(k) + 1] - brownian[static_cast<std::size_t>(k)]
                          : 0.0;
    const Eigen::VectorXd u_next = grid.u.row(k + 1).transpose();
    const Eigen::VectorXd u_now = grid.u.row(k).transpose();
    const Eigen::VectorXd rhs = stepper.explicit_rhs(grid.t[static_cast<std::size_t>(k) + 1], grid.t[static_cast<std::size_t>(k)], u_next, dB);
    const Eigen::VectorXd residual = (stepper.apply_rows(grid.t[static_cast<std::size_t>(k)], u_now) - rhs) / dt;
    for (Eigen::Index j = 0; j < u_now.size(); ++j) {
      const double gap = u_now(j) - problem.obstacle(grid.t[static_cast<std::size_t>(k)], grid.x[static_cast<std::size_t>(j)]);
      worst = std::max(worst, std::abs(std::min(gap, residual(j))) / (1.0 + std::abs(u_now(j))));
    }
  }
  return worst;
}

namespace {

double extended_value(const PidieGrid& grid, int k, double target, const ProblemSpec& problem) {
  const double theta = grid.theta;
  const double tk = grid.t[static_cast<std::size_t>(k)];
  if (target > theta) {
    const double ub = grid.u(k, grid.space_intervals());
    return ub + problem.phi(tk, theta, ub) * (target - theta);
  }
  if (target < -theta) {
    const double ub = grid.u(k, 0);
    return ub + problem.phi(tk, -theta, ub) * (-theta - target);
  }
  return grid.value(k, target);
}

}  // namespace

std::vector<double> representation_z(const PidieGrid& grid, int k, double x, const TeugelsBasis& basis,
                                     const ForwardModel& model, const ProblemSpec& problem) {
  std::vector<double> z(static_cast<std::size_t>(basis.requested()), 0.0);
  const double s = model.sigma_x(x);
  const double ux = grid.value(k, x);
  const double grad = grid.dudx(k, x);
  double second_moment = 0.0;
  for (const auto& a : model.levy.atoms()) {
    second_moment += a.intensity * a.size * a.size;
    const double u1 = extended_value(grid, k, x + s * a.size, problem) - ux - grad * s * a.size;
    for (int i = 1; i <= basis.rank(); ++i) z[static_cast<std::size_t>(i) - 1] += a.intensity * u1 * basis.p(i, a.size);
  }
  if (basis.rank() >= 1) z[0] += s * grad * std::sqrt(second_moment);
  return z;
}

std::vector<double> jump_covariation_z(const PidieGrid& grid, int k, double x, const TeugelsBasis& basis,
                                       const ForwardModel& model, const ProblemSpec& problem) {
  std::vector<double> z(static_cast<std::size_t>(basis.requested()), 0.0);
  const double s = model.sigma_x(x);
  const double ux = grid.value(k, x);
  for (const auto& a : model.levy.atoms()) {
    const double diff = extended_value(grid, k, x + s * a.size, problem) - ux;
    for (int i = 1; i <= basis.rank(); ++i) z[static_cast<std::size_t>(i) - 1] += a.intensity * diff * basis.p(i, a.size);
  }
  return z;
}

FkReport representation_check(const PidieGrid& grid, const TeugelsBasis& basis, const ForwardModel& model,
                              const ProblemSpec& problem, const EnsembleSolution& mc, const PathEnsemble& paths,
                              std::size_t max_samples) {
  const int n = paths.grid.n_steps();
  const int M = grid.time_steps();
  if (std::abs(grid.horizon - paths.grid.horizon()) > 1e-12 || std::abs(grid.theta - model.theta) > 1e-12 ||
      M % n != 0) {
    throw Error(ErrorCode::GridIncompatible,
                "oracle grid must cover the same domain and refine the path time grid by an integer factor");
  }
  if (mc.Y.rows() != paths.n_paths() || mc.Y.cols() != paths.X.cols()) {
    throw Error(ErrorCode::GridIncompatible, "solution and path ensemble shapes differ");
  }
  const int refine = M / n;
  const Eigen::Index N = paths.n_paths();
  const int rank = basis.rank();

  FkReport report;
  report.note = problem.g_is_zero
                    ? "g = 0: deterministic obstacle problem"
                    : "g = g(t,x) with a frozen Brownian path; the pointwise white-noise term is read pathwise";
  report.y0_mc = mc.diagnostics.y0;
  report.y0_se = mc.diagnostics.y0_se;
  report.u0_fd = grid.value(0, model.x0);
  report.y0_abs_diff = std::abs(report.y0_mc - report.u0_fd);

  const std::size_t total = static_cast<std::size_t>(N) * static_cast<std::size_t>(n + 1);
  const std::size_t stride = std::max<std::size_t>(1, total / std::max<std::size_t>(1, max_samples));
  double y_sq = 0.0;
  std::vector<double> z_sq(static_cast<std::size_t>(rank), 0.0), z_mc_sq(static_cast<std::size_t>(rank), 0.0);
  report.z_max_err.assign(static_cast<std::size_t>(rank), 0.0);
  std::size_t z_samples = 0;
  for (std::size_t idx = 0; idx < total; idx += stride) {
    const auto p = static_cast<Eigen::Index>(idx % static_cast<std::size_t>(N));
    const int k = static_cast<int>(idx / static_cast<std::size_t>(N));
    const double x = paths.X(p, k);
    const double err = std::abs(mc.Y(p, k) - grid.value(k * refine, x));
    report.max_abs_y_err = std::max(report.max_abs_y_err, err);
    y_sq += err * err;
    ++report.samples;
    if (k < n && rank > 0) {
      const auto z = representation_z(grid, (k + 1) * refine, x, basis, model, problem);
      for (int i = 0; i < rank; ++i) {
        const double zmc = mc.Z[static_cast<std::size_t>(i)](p, k);
        const double e = std::abs(zmc - z[static_cast<std::size_t>(i)]);
        z_sq[static_cast<std::size_t>(i)] += e * e;
        z_mc_sq[static_cast<std::size_t>(i)] += zmc * zmc;
        report.z_max_err[static_cast<std::size_t>(i)] = std::max(report.z_max_err[static_cast<std::size_t>(i)], e);
      }
      ++z_samples;
    }
  }
  report.rms_y_err = std::sqrt(y_sq / static_cast<double>(std::max<std::size_t>(1, report.samples)));
  for (int i = 0; i < rank; ++i) {
    const double denom = static_cast<double>(std::max<std::size_t>(1, z_samples));
    report.z_rms_err.push_back(std::sqrt(z_sq[static_cast<std::size_t>(i)] / denom));
    report.z_rms_mc.push_back(std::sqrt(z_mc_sq[static_cast<std::size_t>(i)] / denom));
  }

  if (rank >= 1) {
    for (const auto& a : model.levy.atoms()) {
      H1NormalizationRow row;
      row.jump_size = a.size;
      row.intensity = a.intensity;
      row.gram_schmidt = basis.coeff(1, 1) * a.size;
      row.closed_form = a.size / std::sqrt(a.intensity);
      row.ratio = row.closed_form / row.gram_schmidt;
      report.h1_normalization.push_back(row);
    }
  }
  return report;
}

void write_u_grid_csv(std::ostream& out, const PidieGrid& grid) {
  out << "t,x,u\n" << std::setprecision(12);
  for (int k = 0; k <= grid.time_steps(); ++k) {
    for (int j = 0; j <= grid.space_intervals(); ++j) {
      out << grid.t[static_cast<std::size_t>(k)] << ',' << grid.x[static_cast<std::size_t>(j)] << ',' << grid.u(k, j) << '\n';
    }
  }
}

void write_fk_report_csv(std::ostream& out, const FkReport& r) {
  out << "# " << r.note << '\n';
  out << "quantity,index,value\n" << std::setprecision(12);
  out << "y0_mc,," << r.y0_mc << '\n';
  out << "y0_se,," << r.y0_se << '\n';
  out << "u0_fd,," << r.u0_fd << '\n';
  out << "y0_abs_diff,," << r.y0_abs_diff << '\n';
  out << "max_abs_y_err,," << r.max_abs_y_err << '\n';
  out << "rms_y_err,," << r.rms_y_err << '\n';
  out << "samples,," << r.samples << '\n';
  for (std::size_t i = 0; i < r.z_rms_err.size(); ++i) {
    out << "z_rms_err," << i + 1 << ',' << r.z_rms_err[i] << '\n';
    out << "z_max_err," << i + 1 << ',' << r.z_max_err[i] << '\n';
    out << "z_rms_mc," << i + 1 << ',' << r.z_rms_mc[i] << '\n';
  }
  for (std::size_t a = 0; a < r.h1_normalization.size(); ++a) {
    const auto& row = r.h1_normalization[a];
    out << "h1_gram_schmidt," << a + 1 << ',' << row.gram_schmidt << '\n';
    out << "h1_closed_form," << a + 1 << ',' << row.closed_form << '\n';
    out << "h1_ratio," << a + 1 << ',' << row.ratio << '\n';
  }
}

}  // namespace bdsde
