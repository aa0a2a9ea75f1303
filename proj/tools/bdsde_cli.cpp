#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "bdsde/config.hpp"
#include "bdsde/errors.hpp"
#include "bdsde/rng.hpp"
#include "bdsde/suite.hpp"

namespace fs = std::filesystem;
using namespace bdsde;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> paths;
  std::optional<int> steps;
  std::optional<std::string> penalization;
};

ExperimentConfig resolve(const Overrides& o, bool paths_are_solver_paths) {
  ExperimentConfig c = o.config_path.empty() ? default_config() : load_config(o.config_path);
  if (o.seed) c.solver.solver.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.paths && paths_are_solver_paths) {
    c.solver.solver.n_paths = *o.paths;
    c.suite.fk_paths = *o.paths;
  }
  if (o.steps) {
    c.grid.n_steps = *o.steps;
    c.suite.fk_steps = *o.steps;
  }
  validate_config(c);
  return c;
}

// "projection" or a positive number.
std::optional<double> penalization_override(const Overrides& o, ExperimentConfig& c) {
  if (!o.penalization) return std::nullopt;
  if (*o.penalization == "projection") {
    c.solver.solver.mode = ReflectionMode::Projection;
    return std::nullopt;
  }
  double n = 0.0;
  try {
    n = std::stod(*o.penalization);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "--penalization takes a positive number or 'projection'");
  }
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "--penalization takes a positive number or 'projection'");
  c.solver.solver.mode = ReflectionMode::Penalization;
  c.solver.solver.penalization_n = n;
  return n;
}

std::ofstream open_out(const ExperimentConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  const fs::path p = fs::path(c.output_dir) / name;
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + p.string());
  out << std::setprecision(12);
  return out;
}

int cmd_basis(const ExperimentConfig& c) {
  const TeugelsBasis basis = make_basis(c);
  std::ostringstream csv;
  csv << std::setprecision(17) << "i,k,c\n";
  for (int i = 1; i <= basis.rank(); ++i) {
    for (int k = 1; k <= i; ++k) csv << i << ',' << k << ',' << basis.coeff(i, k) << '\n';
  }
  std::cout << csv.str();
  open_out(c, "basis.csv") << csv.str();
  std::cerr << "rank " << basis.rank() << " of " << basis.requested() << ", max orthonormality error "
            << basis.max_orthonormality_error() << '\n';
  return 0;
}

int cmd_simulate(const ExperimentConfig& c, std::size_t n_paths) {
  const ForwardModel model = make_model(c);
  const TeugelsBasis basis = make_basis(c);
  const std::uint64_t seed = c.solver.solver.seed;
  auto out = open_out(c, "paths.csv");
  out << "path,k,t,B,L,X,eta_abs,A";
  for (int i = 1; i <= basis.requested(); ++i) out << ",dH" << i;
  out << '\n';
  const std::vector<double> B = simulate_brownian(model.grid, brownian_seed(seed, 0));
  for (std::size_t p = 0; p < n_paths; ++p) {
    const PathBundle b = simulate_path(model, basis, B, levy_seed(seed, 0, p));
    for (int k = 0; k <= model.grid.n_steps(); ++k) {
      const auto ku = static_cast<std::size_t>(k);
      out << p << ',' << k << ',' << model.grid.t(k) << ',' << b.B[ku] << ',' << b.L[ku] << ',' << b.X[ku] << ','
          << b.eta_abs[ku] << ',' << b.A[ku];
      // dH on row k is the increment over (t_k, t_{k+1}]; empty on the last node
      for (int i = 0; i < basis.requested(); ++i) {
        out << ',';
        if (k < model.grid.n_steps()) out << b.dH.dH(k, i);
      }
      out << '\n';
    }
  }
  std::cerr << "wrote " << n_paths << " paths to " << (fs::path(c.output_dir) / "paths.csv").string() << '\n';
  return 0;
}

void summary_row(std::ostream& out, const std::string& label, const SolveSummary& s) {
  out << label << ',' << s.y0 << ',' << s.y0_se << ',' << s.k_T_mean << ',' << s.skorokhod_residual << ','
      << s.penetration_norm << ',' << s.regression_fallbacks << '\n';
}

int cmd_solve(ExperimentConfig c, const Overrides& o, bool trajectory) {
  const std::optional<double> single_n = penalization_override(o, c);
  const ForwardModel model = make_model(c);
  const TeugelsBasis basis = make_basis(c);
  const ProblemSpec problem = make_problem(c);
  const HypothesisReport hyp = check_hypotheses(problem, model.grid.horizon(), basis.requested(), c.solver.solver.seed);
  if (!hyp.lipschitz_ok) std::cerr << "warning: declared Lipschitz constant exceeded on spot checks\n";
  if (!hyp.monotone_ok) std::cerr << "warning: declared monotonicity constant violated on spot checks\n";

  auto out = open_out(c, "solve_summary.csv");
  out << "n,y0,y0_se,k_T_mean,skorokhod_residual,penetration_norm,regression_fallbacks\n";
  std::vector<double> ns;
  if (c.solver.solver.mode == ReflectionMode::Projection) {
    ns.push_back(0.0);
  } else if (single_n) {
    ns.push_back(*single_n);
  } else {
    ns = c.solver.schedule;
  }
  std::vector<EnsembleSolution> kept;
  for (double n : ns) {
    SolverConfig sc = c.solver.solver;
    if (n > 0.0) sc.penalization_n = n;
    std::vector<EnsembleSolution> sols;
    const SolveSummary s = solve(problem, sc, model, basis, trajectory ? &sols : nullptr);
    std::ostringstream label;
    label << std::setprecision(12);
    if (n > 0.0) label << n;
    else label << "projection";
    summary_row(out, label.str(), s);
    std::cout << label.str() << ": Y0 = " << s.y0 << " +- " << s.y0_se << ", E[K_T] = " << s.k_T_mean << '\n';
    if (trajectory) kept = std::move(sols);
  }
  if (trajectory && !kept.empty()) {
    // Last entry of the schedule, first outer sample, re-simulated for X.
    const PathEnsemble paths = simulate_ensemble(model, basis, c.solver.solver.n_paths, c.solver.solver.seed, 0);
    const EnsembleSolution& sol = kept.front();
    auto tr = open_out(c, "trajectory.csv");
    tr << "path,k,t,X,Y,K,S";
    for (int i = 1; i <= basis.requested(); ++i) tr << ",Z" << i;
    tr << '\n';
    const Eigen::Index n_show = std::min<Eigen::Index>(paths.n_paths(), 100);
    for (Eigen::Index p = 0; p < n_show; ++p) {
      for (Eigen::Index k = 0; k < sol.Y.cols(); ++k) {
        tr << p << ',' << k << ',' << model.grid.t(static_cast<int>(k)) << ',' << paths.X(p, k) << ',' << sol.Y(p, k)
           << ',' << sol.K(p, k) << ',' << sol.S(p, k);
        for (const auto& z : sol.Z) tr << ',' << z(p, k);
        tr << '\n';
      }
    }
  }
  return 0;
}

int cmd_verify(const ExperimentConfig& c) {
  SuiteReport report;
  report.rows.push_back(run_single_suite(SuiteKind::Orthonormality, c));
  auto out = open_out(c, "verify.csv");
  write_suite_csv(out, report);
  write_suite_text(std::cout, report);
  return report.passed() ? 0 : 1;
}

int cmd_crosscheck(ExperimentConfig c, const Overrides& o) {
  penalization_override(o, c);
  const ProblemSpec problem = make_problem(c);
  if (!problem.g_is_zero && problem.g_depends_on_y) {
    throw Error(ErrorCode::InvalidArgument, "crosscheck needs g = 0 or g independent of y");
  }
  const ForwardModel model = make_model(c, c.suite.fk_steps);
  const TeugelsBasis basis = make_basis(c);
  SolverConfig sc = c.solver.solver;
  sc.n_paths = c.suite.fk_paths;
  const PathEnsemble paths = simulate_ensemble(model, basis, sc.n_paths, sc.seed);
  const EnsembleSolution mc = solve_penalized(problem, sc, paths);
  const PidieGridSpec spec{c.grid.fd_space_intervals, c.grid.fd_time_steps};
  const OracleMode mode = problem.g_is_zero ? OracleMode::Deterministic : OracleMode::Pathwise;
  std::vector<double> b_fine;
  if (mode == OracleMode::Pathwise) {
    if (spec.time_steps % c.suite.fk_steps != 0) {
      throw Error(ErrorCode::GridIncompatible, "fd_time_steps must be a multiple of the path steps");
    }
    const int r = spec.time_steps / c.suite.fk_steps;
    for (int k = 0; k < c.suite.fk_steps; ++k) {
      for (int s = 0; s < r; ++s) {
        const double w = static_cast<double>(s) / r;
        b_fine.push_back((1 - w) * paths.B[static_cast<std::size_t>(k)] + w * paths.B[static_cast<std::size_t>(k) + 1]);
      }
    }
    b_fine.push_back(paths.B.back());
  }
  const PidieGrid grid = solve_obstacle_pidie(problem, model, basis, spec, mode, b_fine);
  const FkReport fk = representation_check(grid, basis, model, problem, mc, paths);
  auto ug = open_out(c, "u_grid.csv");
  write_u_grid_csv(ug, grid);
  auto rep = open_out(c, "fk_report.csv");
  write_fk_report_csv(rep, fk);
  std::cout << "Y0 (Monte Carlo) = " << fk.y0_mc << " +- " << fk.y0_se << "\nu(0, x0) (grid)  = " << fk.u0_fd
            << "\n|difference|     = " << fk.y0_abs_diff << " (tolerance " << c.suite.fk_tolerance << ")\n"
            << "complementarity defect " << complementarity_defect(grid, problem, model, basis, mode, b_fine)
            << ", boundary residual " << grid.boundary_residual << '\n';
  return fk.y0_abs_diff <= c.suite.fk_tolerance ? 0 : 1;
}

int cmd_suite(const ExperimentConfig& c) {
  const SuiteReport report = run_suite(c);
  auto csv = open_out(c, "suite_report.csv");
  write_suite_csv(csv, report);
  auto txt = open_out(c, "suite_report.txt");
  write_suite_text(txt, report);
  write_suite_text(std::cout, report);
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reflected backward doubly SDEs driven by a Levy process: simulation, solver and checks"};
  app.require_subcommand(1);
  Overrides o;
  std::size_t sim_paths = 10;
  bool trajectory = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--paths", o.paths, "number of paths")->check(CLI::PositiveNumber);
    sub->add_option("--steps", o.steps, "number of time steps")->check(CLI::PositiveNumber);
    sub->add_option("--penalization", o.penalization, "penalization parameter n, or 'projection'");
  };
  auto* basis = app.add_subcommand("basis", "print the Teugels coefficients c_{i,k} as CSV");
  auto* simulate = app.add_subcommand("simulate", "write simulated paths to paths.csv");
  auto* solve_cmd = app.add_subcommand("solve", "solve the reflected equation, write solve_summary.csv");
  auto* verify = app.add_subcommand("verify", "run the exact orthonormality check");
  auto* crosscheck = app.add_subcommand("crosscheck", "compare the Monte Carlo solution with the grid solution");
  auto* suite = app.add_subcommand("suite", "run the selected verification suites");
  for (auto* s : {basis, simulate, solve_cmd, verify, crosscheck, suite}) add_common(s);
  solve_cmd->add_flag("--trajectory", trajectory, "also write trajectory.csv for the first 100 paths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed() && o.paths) sim_paths = *o.paths;
    ExperimentConfig c = resolve(o, !simulate->parsed());
    if (basis->parsed()) return cmd_basis(c);
    if (simulate->parsed()) return cmd_simulate(c, sim_paths);
    if (solve_cmd->parsed()) return cmd_solve(c, o, trajectory);
    if (verify->parsed()) return cmd_verify(c);
    if (crosscheck->parsed()) return cmd_crosscheck(c, o);
    if (suite->parsed()) {
      penalization_override(o, c);
      return cmd_suite(c);
    }
  } catch (const Error& e) {
    std::cerr << "error " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
