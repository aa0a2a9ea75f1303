#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bdsde/coefficients.hpp"
#include "bdsde/levy_model.hpp"
#include "bdsde/path_engine.hpp"
#include "bdsde/pdie_oracle.hpp"
#include "bdsde/solver.hpp"

namespace bdsde {

struct GridConfig {
  double horizon = 1.0;
  int n_steps = 100;
  int fd_space_intervals = 200;
  int fd_time_steps = 400;

  bool operator==(const GridConfig&) const = default;
};

struct ForwardConfig {
  double theta = 1.0;
  double x0 = 0.0;
  CoefficientChoice sigma_x{"constant", {1.0}};
  AMode a_mode = AMode::LocalTime;
  std::vector<double> a_table;

  bool operator==(const ForwardConfig&) const = default;
};

struct ProblemConfig {
  CoefficientChoice driver{"example51", {}};
  CoefficientChoice boundary{"example51", {}};
  CoefficientChoice noise{"example51", {}};
  CoefficientChoice terminal{"example51", {}};
  CoefficientChoice obstacle{"example51", {}};
  double lipschitz_c = 1.0;
  double mono_beta = -0.5;

  bool operator==(const ProblemConfig&) const = default;
};

struct SolverSection {
  SolverConfig solver;
  int teugels_m = 2;
  std::vector<double> schedule{4.0, 16.0, 64.0, 256.0};

  bool operator==(const SolverSection& o) const;
};

enum class SuiteKind {
  Orthonormality,
  StrongOrthonormality,
  Skorokhod,
  Penalization,
  Monotonicity,
  Comparison,
  Uniqueness,
  FeynmanKac,
};

inline constexpr SuiteKind kAllSuites[] = {
    SuiteKind::Orthonormality, SuiteKind::StrongOrthonormality, SuiteKind::Skorokhod, SuiteKind::Penalization,
    SuiteKind::Monotonicity,   SuiteKind::Comparison,           SuiteKind::Uniqueness, SuiteKind::FeynmanKac,
};

std::string_view suite_name(SuiteKind kind) noexcept;

struct SuiteSettings {
  std::vector<SuiteKind> selected;  // in run order, no duplicates
  std::size_t strong_paths = 100000;
  std::size_t skorokhod_paths = 1000;
  std::size_t fk_paths = 20000;
  int fk_steps = 200;
  double fk_tolerance = 0.05;
  double comparison_tolerance = 0.01;
  double comparison_max_fraction = 0.01;
  CoefficientChoice comparison_terminal_low{"constant", {0.0}};
  CoefficientChoice comparison_terminal_high{"constant", {1.0}};
  CoefficientChoice comparison_obstacle{"linear", {0.5, -0.5, 0.0}};
  std::uint64_t second_seed = 0;  // 0: derived from the master seed

  bool operator==(const SuiteSettings&) const = default;
};

struct ExperimentConfig {
  LevySpec levy;
  GridConfig grid;
  ForwardConfig forward;
  ProblemConfig problem;
  SolverSection solver;
  SuiteSettings suite;
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

// INI-like text:
//
//   [levy]     drift_b, sigma, compensated, atom = <size> <intensity> (repeatable)
//   [grid]     horizon, n_steps, fd_space_intervals, fd_time_steps
//   [forward]  theta, x0, sigma_x = <coefficient>, a_mode = local_time|identity_time|table, a_table
//   [problem]  driver, boundary, noise, terminal, obstacle = <coefficient>; lipschitz_c, mono_beta
//   [solver]   paths, mode = projection|penalization, penalization_n, schedule, degree,
//              boundary_indicator, boundary_layer, outer_b_samples, seed, teugels_m
//   [suite]    select = all | <name> ..., strong_paths, skorokhod_paths, fk_paths, fk_steps,
//              fk_tolerance, comparison_tolerance, comparison_max_fraction,
//              comparison_terminal_low, comparison_terminal_high, comparison_obstacle,
//              second_seed
//   [output]   dir
//
// `#` and `;` start comments. Keys not listed above, malformed values and
// violated invariants throw Error{ConfigParseError} naming the line;
// unknown coefficient names throw Error{UnknownCoefficientName}.
ExperimentConfig parse_config(std::string_view text);
std::string serialize_config(const ExperimentConfig& config);

ExperimentConfig load_config(const std::string& path);

// Setup used when no config file is given: two atoms (0.5, 1.0) and
// (-0.4, 1.5), drift 0.1 so that E[L_1] = 0, example51 coefficients.
ExperimentConfig default_config();

// Throws Error{ConfigParseError | UnknownCoefficientName | InvalidArgument}.
void validate_config(const ExperimentConfig& config);

ForwardModel make_model(const ExperimentConfig& config);
ForwardModel make_model(const ExperimentConfig& config, int n_steps);
ProblemSpec make_problem(const ExperimentConfig& config);
TeugelsBasis make_basis(const ExperimentConfig& config);

}  // namespace bdsde
