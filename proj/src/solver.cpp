#include "bdsde/solver.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <random>
#include <sstream>

#include "bdsde/errors.hpp"
#include "bdsde/rng.hpp"

namespace bdsde {
namespace {

// Least-squares projection onto span{1, s, ..., s^d, 1{boundary layer}}, s = x / theta.
// The degree is lowered until the design has full column rank; the constant
// column is always kept so that fitted values preserve the sample mean.
class StepRegression {
 public:
  StepRegression(const Eigen::VectorXd& x, double theta, int degree, bool indicator, double layer) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd ind;
    bool use_indicator = false;
    if (indicator) {
      ind = (x.array().abs() >= theta * (1.0 - layer)).cast<double>();
      const double hits = ind.sum();
      use_indicator = hits > 0.0 && hits < static_cast<double>(n);
    }
    for (int d = degree; d >= 0; --d) {
      const Eigen::Index cols = d + 1 + (use_indicator ? 1 : 0);
      design_.resize(n, cols);
      design_.col(0).setOnes();
      for (int j = 1; j <= d; ++j) design_.col(j) = design_.col(j - 1).cwiseProduct(x / theta);
      if (use_indicator) design_.col(cols - 1) = ind;
      qr_.setThreshold(1e-10);
      qr_.compute(design_);
      if (qr_.rank() == cols) {
        degree_used_ = d;
        return;
      }
    }
    throw Error(ErrorCode::SingularRegression, "regression design is rank deficient at degree 0");
  }

  Eigen::MatrixXd fitted(const Eigen::MatrixXd& targets) const { return design_ * qr_.solve(targets); }
  int degree_used() const noexcept { return degree_used_; }

 private:
  Eigen::MatrixXd design_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  int degree_used_ = 0;
};

double sample_std(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

HypothesisReport check_hypotheses(const ProblemSpec& problem, double horizon, int z_dim,
                                  std::uint64_t seed, int samples) {
  Rng rng(seed);
  std::uniform_real_distribution<double> ut(0.0, horizon);
  std::uniform_real_distribution<double> ux(-problem.theta, problem.theta);
  std::uniform_real_distribution<double> uy(-10.0, 10.0);
  HypothesisReport report;
  report.worst_monotonicity = -std::numeric_limits<double>::infinity();
  std::vector<double> z1(static_cast<std::size_t>(z_dim)), z2(static_cast<std::size_t>(z_dim));
  for (int s = 0; s < samples; ++s) {
    const double t = ut(rng), x = ux(rng), y1 = uy(rng), y2 = uy(rng);
    double dz2 = 0.0;
    for (int i = 0; i < z_dim; ++i) {
      z1[static_cast<std::size_t>(i)] = uy(rng);
      z2[static_cast<std::size_t>(i)] = uy(rng);
      dz2 += std::pow(z1[static_cast<std::size_t>(i)] - z2[static_cast<std::size_t>(i)], 2);
    }
    const double dy2 = (y1 - y2) * (y1 - y2);
    if (dy2 + dz2 > 0.0) {
      const double df = problem.f(t, x, y1, z1) - problem.f(t, x, y2, z2);
      report.worst_lipschitz_ratio = std::max(report.worst_lipschitz_ratio, df * df / (dy2 + dz2));
    }
    if (dy2 > 0.0) {
      const double dg = problem.g(t, x, y1) - problem.g(t, x, y2);
      report.worst_noise_ratio = std::max(report.worst_noise_ratio, dg * dg / dy2);
      const double mono = (y1 - y2) * (problem.phi(t, x, y1) - problem.phi(t, x, y2)) / dy2;
      report.worst_monotonicity = std::max(report.worst_monotonicity, mono);
    }
  }
  const double slack = 1e-9;
  report.lipschitz_ok = report.worst_lipschitz_ratio <= problem.lipschitz_c * (1 + slack) &&
                        report.worst_noise_ratio <= problem.lipschitz_c * (1 + slack);
  report.monotone_ok = report.worst_monotonicity <= problem.mono_beta + slack;
  return report;
}

void validate_solver_config(const SolverConfig& config) {
  if (config.degree < 0) throw Error(ErrorCode::InvalidArgument, "regression degree must be >= 0");
  if (config.n_paths < 10 * static_cast<std::size_t>(config.basis_dimension())) {
    std::ostringstream msg;
    msg << "n_paths = " << config.n_paths << " is below 10 x basis dimension (" << config.basis_dimension() << ")";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
  if (config.mode == ReflectionMode::Penalization && !(config.penalization_n > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "penalization n must be > 0");
  }
  if (config.outer_b_samples < 1) throw Error(ErrorCode::InvalidArgument, "outer_b_samples must be >= 1");
  if (!(config.boundary_layer > 0.0 && config.boundary_layer < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "boundary_layer must lie in (0, 1)");
  }
}

EnsembleSolution solve_penalized(const ProblemSpec& problem, const SolverConfig& config,
                                 const PathEnsemble& paths) {
  validate_solver_config(config);
  const TimeGrid& grid = paths.grid;
  const Eigen::Index N = paths.n_paths();
  const int n = grid.n_steps();
  const double dt = grid.dt();
  const int m = static_cast<int>(paths.dH.size());
  const int rank = paths.basis_rank;
  if (paths.X.cols() != static_cast<Eigen::Index>(grid.n_nodes()) || paths.B.size() != grid.n_nodes()) {
    throw Error(ErrorCode::InvalidArgument, "path ensemble does not match its grid");
  }
  if (static_cast<std::size_t>(N) != config.n_paths) {
    throw Error(ErrorCode::InvalidArgument, "ensemble size differs from config.n_paths");
  }

  EnsembleSolution sol;
  sol.Y.resize(N, n + 1);
  sol.K = Eigen::MatrixXd::Zero(N, n + 1);
  sol.S.resize(N, n + 1);
  sol.Z.assign(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(N, n + 1));
  Eigen::MatrixXd dK = Eigen::MatrixXd::Zero(N, n);

  for (Eigen::Index p = 0; p < N; ++p) {
    for (int k = 0; k <= n; ++k) sol.S(p, k) = problem.obstacle(grid.t(k), paths.X(p, k));
    const double xi = problem.terminal(paths.X(p, n));
    if (!(sol.S(p, n) <= xi + 1e-12)) {
      std::ostringstream msg;
      msg << "S_T = " << sol.S(p, n) << " exceeds xi = " << xi << " on path " << p;
      throw Error(ErrorCode::TerminalBelowObstacle, msg.str());
    }
    sol.Y(p, n) = xi;
  }
  sol.pathwise_y0 = sol.Y.col(n);

  const bool penalize = config.mode == ReflectionMode::Penalization;
  const double pen = penalize ? config.penalization_n * dt : 0.0;
  std::vector<double> z_next(static_cast<std::size_t>(m), 0.0);
  Eigen::MatrixXd targets(N, 2);
  Eigen::MatrixXd z_targets(N, rank);

  for (int k = n - 1; k >= 0; --k) {
    const double t_next = grid.t(k + 1);
    const double t_now = grid.t(k);
    const double dB = paths.B[static_cast<std::size_t>(k) + 1] - paths.B[static_cast<std::size_t>(k)];

    Eigen::VectorXd explicit_part(N);
    for (Eigen::Index p = 0; p < N; ++p) {
      for (int i = 0; i < m; ++i) z_next[static_cast<std::size_t>(i)] = sol.Z[static_cast<std::size_t>(i)](p, k + 1);
      const double y_next = sol.Y(p, k + 1);
      const double x_next = paths.X(p, k + 1);
      const double dA = paths.A(p, k + 1) - paths.A(p, k);
      explicit_part(p) = problem.f(t_next, x_next, y_next, z_next) * dt + problem.phi(t_next, x_next, y_next) * dA;
      targets(p, 0) = y_next + explicit_part(p);
      targets(p, 1) = y_next;
    }

    const StepRegression reg(paths.X.col(k), problem.theta, config.degree, config.boundary_indicator,
                             config.boundary_layer);
    if (reg.degree_used() < config.degree) ++sol.diagnostics.regression_fallbacks;
    const Eigen::MatrixXd fitted = reg.fitted(targets);

    // E[dH | F_k] = 0, so centring Y_{k+1} by its fitted mean leaves the
    // regression target unbiased and removes most of its variance.
    if (rank > 0) {
      for (Eigen::Index p = 0; p < N; ++p) {
        const double centred = sol.Y(p, k + 1) - fitted(p, 1);
        for (int i = 0; i < rank; ++i) z_targets(p, i) = centred * paths.dH[static_cast<std::size_t>(i)](p, k);
      }
      const Eigen::MatrixXd z_fit = reg.fitted(z_targets);
      for (int i = 0; i < rank; ++i) sol.Z[static_cast<std::size_t>(i)].col(k) = z_fit.col(i) / dt;
    }

    for (Eigen::Index p = 0; p < N; ++p) {
      const double y_hat0 = fitted(p, 0);
      const double noise = problem.g_is_zero ? 0.0 : problem.g(t_now, paths.X(p, k), y_hat0) * dB;
      const double y_hat = y_hat0 + noise;
      const double gap = sol.S(p, k) - y_hat;  // (y_hat - S)^-
      double push = 0.0;
      if (gap > 0.0) push = penalize ? pen / (1.0 + pen) * gap : gap;
      sol.Y(p, k) = y_hat + push;
      dK(p, k) = push;
      sol.pathwise_y0(p) += explicit_part(p) + noise + push;
    }
  }

  for (int k = 0; k < n; ++k) sol.K.col(k + 1) = sol.K.col(k) + dK.col(k);

  auto& diag = sol.diagnostics;
  diag.y0 = sol.Y.col(0).mean();
  diag.y0_se = sample_std(sol.pathwise_y0) / std::sqrt(static_cast<double>(N));
  diag.k_T_mean = sol.K.col(n).mean();
  diag.skorokhod_residual = skorokhod_residual(sol, sol.S);
  diag.penetration_norm = penetration_norm(sol, sol.S);
  if (diag.regression_fallbacks > 0) {
    std::ostringstream msg;
    msg << "regression degree reduced below " << config.degree << " on " << diag.regression_fallbacks
        << " of " << n << " time steps (rank-deficient design)";
    diag.warnings.push_back(msg.str());
  }
  return sol;
}

double skorokhod_residual(const EnsembleSolution& sol, const Eigen::MatrixXd& S) {
  const Eigen::Index N = sol.Y.rows();
  const Eigen::Index n = sol.Y.cols() - 1;
  double total = 0.0;
  for (Eigen::Index p = 0; p < N; ++p) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double dK = sol.K(p, k + 1) - sol.K(p, k);
      if (dK != 0.0) total += std::abs(sol.Y(p, k) - S(p, k)) * dK;
    }
  }
  return total / static_cast<double>(N);
}

double penetration_norm(const EnsembleSolution& sol, const Eigen::MatrixXd& S) {
  const Eigen::ArrayXXd below = (S - sol.Y).array().max(0.0);
  return below.square().colwise().mean().maxCoeff();
}

SolveSummary solve(const ProblemSpec& problem, const SolverConfig& config, const ForwardModel& model,
                   const TeugelsBasis& basis, std::vector<EnsembleSolution>* solutions) {
  validate_solver_config(config);
  SolveSummary summary;
  const int n_outer = config.outer_b_samples;
  double se2 = 0.0;
  for (int o = 0; o < n_outer; ++o) {
    const PathEnsemble paths = simulate_ensemble(model, basis, config.n_paths, config.seed, static_cast<std::uint64_t>(o));
    EnsembleSolution sol = solve_penalized(problem, config, paths);
    const auto& d = sol.diagnostics;
    summary.y0_per_outer.push_back(d.y0);
    summary.y0 += d.y0 / n_outer;
    se2 += d.y0_se * d.y0_se;
    summary.k_T_mean += d.k_T_mean / n_outer;
    summary.skorokhod_residual += d.skorokhod_residual / n_outer;
    summary.penetration_norm = std::max(summary.penetration_norm, d.penetration_norm);
    summary.regression_fallbacks += d.regression_fallbacks;
    if (solutions) solutions->push_back(std::move(sol));
  }
  if (n_outer == 1) {
    summary.y0_se = std::sqrt(se2);
  } else {
    // Spread across frozen Brownian paths already contains the within-sample noise.
    Eigen::VectorXd per_outer = Eigen::Map<const Eigen::VectorXd>(summary.y0_per_outer.data(), n_outer);
    summary.y0_se = sample_std(per_outer) / std::sqrt(static_cast<double>(n_outer));
  }
  return summary;
}

std::vector<EnsembleSolution> solve_family(const ProblemSpec& problem, const SolverConfig& config,
                                           const PathEnsemble& paths, const std::vector<double>& schedule) {
  std::vector<EnsembleSolution> family;
  family.reserve(schedule.size());
  for (double n : schedule) {
    SolverConfig c = config;
    c.mode = ReflectionMode::Penalization;
    c.penalization_n = n;
    family.push_back(solve_penalized(problem, c, paths));
  }
  return family;
}

BoundReport apriori_bounds(const std::vector<EnsembleSolution>& family, const std::vector<double>& schedule,
                           const PathEnsemble& paths, double plateau_tol) {
  if (family.size() != schedule.size()) {
    throw Error(ErrorCode::InvalidArgument, "family and schedule sizes differ");
  }
  BoundReport report;
  const double dt = paths.grid.dt();
  for (std::size_t j = 0; j < family.size(); ++j) {
    const auto& sol = family[j];
    const Eigen::Index N = sol.Y.rows();
    const Eigen::Index n = sol.Y.cols() - 1;
    BoundEntry e;
    e.n = schedule[j];
    e.sup_y2 = sol.Y.array().square().rowwise().maxCoeff().mean();
    const Eigen::MatrixXd dA = paths.A.rightCols(n) - paths.A.leftCols(n);
    e.int_y2_dA = (sol.Y.leftCols(n).array().square() * dA.array()).rowwise().sum().mean();
    double z2 = 0.0;
    for (const auto& Z : sol.Z) z2 += Z.leftCols(n).array().square().sum();
    e.int_z2_dt = z2 * dt / static_cast<double>(N);
    e.k_T2 = sol.K.col(n).array().square().mean();
    e.total = e.sup_y2 + e.int_y2_dA + e.int_z2_dt + e.k_T2;
    report.sup_total = std::max(report.sup_total, e.total);
    report.entries.push_back(e);
  }
  if (report.entries.size() >= 2) {
    const double last = report.entries.back().total;
    const double prev = report.entries[report.entries.size() - 2].total;
    report.bounded = std::isfinite(last) && last <= (1.0 + plateau_tol) * prev + 1e-12;
  } else {
    report.bounded = report.entries.empty() || std::isfinite(report.entries.front().total);
  }
  return report;
}

ComparisonReport check_comparison_hypothesis(const ProblemSpec& problem1, const EnsembleSolution& sol1,
                                             const EnsembleSolution& sol2, const PathEnsemble& paths) {
  if (sol1.Y.rows() != sol2.Y.rows() || sol1.Y.cols() != sol2.Y.cols() || sol1.Z.size() != sol2.Z.size()) {
    throw Error(ErrorCode::InvalidArgument, "solutions are not on identical paths");
  }
  const Eigen::Index N = sol1.Y.rows();
  const int n = paths.grid.n_steps();
  const int m = static_cast<int>(sol1.Z.size());
  const int rank = paths.basis_rank;
  ComparisonReport report;
  report.min_jump_sum = std::numeric_limits<double>::infinity();
  std::vector<double> z_before(static_cast<std::size_t>(m)), z_after(static_cast<std::size_t>(m));

  for (Eigen::Index p = 0; p < N; ++p) {
    for (int k = 0; k < n; ++k) {
      const double t = paths.grid.t(k);
      const double x = paths.X(p, k);
      const double y2 = sol2.Y(p, k);
      // Walk from Z^1 to Z^2 one coordinate at a time.
      for (int i = 0; i < m; ++i) z_before[static_cast<std::size_t>(i)] = sol1.Z[static_cast<std::size_t>(i)](p, k);
      double jump_sum = 0.0;
      for (int i = 0; i < rank; ++i) {
        z_after = z_before;
        const double z1i = sol1.Z[static_cast<std::size_t>(i)](p, k);
        const double z2i = sol2.Z[static_cast<std::size_t>(i)](p, k);
        z_after[static_cast<std::size_t>(i)] = z2i;
        double beta = 0.0;
        // Quotients over round-off sized steps carry no information.
        if (std::abs(z1i - z2i) > 1e-9 * (1.0 + std::abs(z1i) + std::abs(z2i))) beta = (problem1.f(t, x, y2, z_before) - problem1.f(t, x, y2, z_after)) / (z1i - z2i);
        report.max_abs_beta = std::max(report.max_abs_beta, std::abs(beta));
        jump_sum += beta * paths.dH[static_cast<std::size_t>(i)](p, k);
        z_before = z_after;
      }
      report.min_jump_sum = std::min(report.min_jump_sum, jump_sum);
      if (!(jump_sum > -1.0)) ++report.violations;
    }
  }
  report.hypothesis_holds = report.violations == 0;
  return report;
}

double ordering_violation_fraction(const EnsembleSolution& sol1, const EnsembleSolution& sol2, double tol) {
  if (sol1.Y.rows() != sol2.Y.rows() || sol1.Y.cols() != sol2.Y.cols()) {
    throw Error(ErrorCode::InvalidArgument, "solutions are not on identical paths");
  }
  const auto bad = (sol1.Y.array() < sol2.Y.array() - tol).count();
  return static_cast<double>(bad) / static_cast<double>(sol1.Y.size());
}

}  // namespace bdsde
