#include "bdsde/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bdsde/errors.hpp"
#include "bdsde/rng.hpp"

namespace bdsde {

bool SolverSection::operator==(const SolverSection& o) const {
  const auto& a = solver;
  const auto& b = o.solver;
  return a.n_paths == b.n_paths && a.mode == b.mode && a.penalization_n == b.penalization_n &&
         a.degree == b.degree && a.boundary_indicator == b.boundary_indicator &&
         a.boundary_layer == b.boundary_layer && a.outer_b_samples == b.outer_b_samples && a.seed == b.seed &&
         teugels_m == o.teugels_m && schedule == o.schedule;
}

std::string_view suite_name(SuiteKind kind) noexcept {
  switch (kind) {
    case SuiteKind::Orthonormality: return "orthonormality";
    case SuiteKind::StrongOrthonormality: return "strong_orthonormality";
    case SuiteKind::Skorokhod: return "skorokhod";
    case SuiteKind::Penalization: return "penalization";
    case SuiteKind::Monotonicity: return "monotonicity";
    case SuiteKind::Comparison: return "comparison";
    case SuiteKind::Uniqueness: return "uniqueness";
    case SuiteKind::FeynmanKac: return "feynman_kac";
  }
  return "unknown";
}

namespace {

[[noreturn]] void parse_error(int line, const std::string& what) {
  throw Error(ErrorCode::ConfigParseError, "line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != ',') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double to_double(std::string_view s, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) parse_error(line, "expected a number, got '" + std::string(s) + "'");
  if (!std::isfinite(v)) parse_error(line, "number must be finite");
  return v;
}

template <class Int>
Int to_int(std::string_view s, int line) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) parse_error(line, "expected an integer, got '" + std::string(s) + "'");
  return v;
}

bool to_bool(std::string_view s, int line) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  parse_error(line, "expected true or false, got '" + std::string(s) + "'");
}

std::vector<double> to_doubles(std::string_view s, int line) {
  std::vector<double> out;
  for (auto w : split_words(s)) out.push_back(to_double(w, line));
  return out;
}

CoefficientChoice to_choice(std::string_view s, int line) {
  const auto words = split_words(s);
  if (words.empty()) parse_error(line, "missing coefficient name");
  CoefficientChoice c;
  c.name = std::string(words[0]);
  for (std::size_t i = 1; i < words.size(); ++i) c.params.push_back(to_double(words[i], line));
  return c;
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string format_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_number(v[i]);
  }
  return s;
}

template <class Fn>
void check_choice(const CoefficientChoice& c, int line, Fn make) {
  try {
    make(c);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownCoefficientName) throw;
    parse_error(line, e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::string section;
  std::set<std::string> seen;
  bool atoms_seen = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_error(line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> known{"levy", "grid", "forward", "problem", "solver", "suite", "output"};
      if (!known.count(section)) parse_error(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parse_error(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) parse_error(line_no, "key '" + key + "' outside of a section");
    if (value.empty()) parse_error(line_no, "empty value for '" + key + "'");
    const std::string full = section + "." + key;
    if (key != "atom" && !seen.insert(full).second) parse_error(line_no, "duplicate key '" + full + "'");

    auto positive_int = [&](int& dst) {
      dst = to_int<int>(value, line_no);
      if (dst < 1) parse_error(line_no, key + " must be >= 1");
    };
    auto positive_size = [&](std::size_t& dst) {
      dst = to_int<std::size_t>(value, line_no);
      if (dst < 1) parse_error(line_no, key + " must be >= 1");
    };
    auto positive_double = [&](double& dst) {
      dst = to_double(value, line_no);
      if (dst <= 0.0) parse_error(line_no, key + " must be > 0");
    };

    if (section == "levy") {
      if (key == "drift_b") {
        cfg.levy.drift_b = to_double(value, line_no);
      } else if (key == "sigma") {
        cfg.levy.sigma = to_double(value, line_no);
        if (cfg.levy.sigma < 0.0) parse_error(line_no, "sigma must be >= 0");
      } else if (key == "compensated") {
        cfg.levy.compensated = to_bool(value, line_no);
      } else if (key == "atom") {
        const auto v = to_doubles(value, line_no);
        if (v.size() != 2) parse_error(line_no, "atom takes <size> <intensity>");
        if (!atoms_seen) cfg.levy.atoms.clear();
        atoms_seen = true;
        cfg.levy.atoms.push_back({v[0], v[1]});
        try {
          validate_levy_spec(cfg.levy);
        } catch (const Error& e) {
          parse_error(line_no, e.what());
        }
      } else {
        parse_error(line_no, "unknown key '" + full + "'");
      }
    } else if (section == "grid") {
      if (key == "horizon") positive_double(cfg.grid.horizon);
      else if (key == "n_steps") positive_int(cfg.grid.n_steps);
      else if (key == "fd_space_intervals") positive_int(cfg.grid.fd_space_intervals);
      else if (key == "fd_time_steps") positive_int(cfg.grid.fd_time_steps);
      else parse_error(line_no, "unknown key '" + full + "'");
    } else if (section == "forward") {
      if (key == "theta") {
        positive_double(cfg.forward.theta);
      } else if (key == "x0") {
        cfg.forward.x0 = to_double(value, line_no);
      } else if (key == "sigma_x") {
        cfg.forward.sigma_x = to_choice(value, line_no);
        check_choice(cfg.forward.sigma_x, line_no, make_sigma_x);
      } else if (key == "a_mode") {
        if (value == "local_time") cfg.forward.a_mode = AMode::LocalTime;
        else if (value == "identity_time") cfg.forward.a_mode = AMode::IdentityTime;
        else if (value == "table") cfg.forward.a_mode = AMode::UserTable;
        else parse_error(line_no, "a_mode must be local_time, identity_time or table");
      } else if (key == "a_table") {
        cfg.forward.a_table = to_doubles(value, line_no);
      } else {
        parse_error(line_no, "unknown key '" + full + "'");
      }
    } else if (section == "problem") {
      auto& p = cfg.problem;
      if (key == "driver") {
        p.driver = to_choice(value, line_no);
        check_choice(p.driver, line_no, make_driver);
      } else if (key == "boundary") {
        p.boundary = to_choice(value, line_no);
        check_choice(p.boundary, line_no, make_boundary);
      } else if (key == "noise") {
        p.noise = to_choice(value, line_no);
        check_choice(p.noise, line_no, make_noise);
      } else if (key == "terminal") {
        p.terminal = to_choice(value, line_no);
        check_choice(p.terminal, line_no, make_terminal);
      } else if (key == "obstacle") {
        p.obstacle = to_choice(value, line_no);
        check_choice(p.obstacle, line_no, make_obstacle);
      } else if (key == "lipschitz_c") {
        positive_double(p.lipschitz_c);
      } else if (key == "mono_beta") {
        p.mono_beta = to_double(value, line_no);
        if (p.mono_beta >= 0.0) parse_error(line_no, "mono_beta must be < 0");
      } else {
        parse_error(line_no, "unknown key '" + full + "'");
      }
    } else if (section == "solver") {
      auto& s = cfg.solver.solver;
      if (key == "paths") {
        positive_size(s.n_paths);
      } else if (key == "mode") {
        if (value == "projection") s.mode = ReflectionMode::Projection;
        else if (value == "penalization") s.mode = ReflectionMode::Penalization;
        else parse_error(line_no, "mode must be projection or penalization");
      } else if (key == "penalization_n") {
        positive_double(s.penalization_n);
      } else if (key == "schedule") {
        cfg.solver.schedule = to_doubles(value, line_no);
        if (cfg.solver.schedule.empty()) parse_error(line_no, "schedule is empty");
        for (std::size_t i = 0; i < cfg.solver.schedule.size(); ++i) {
          if (cfg.solver.schedule[i] <= 0.0 || (i > 0 && cfg.solver.schedule[i] <= cfg.solver.schedule[i - 1])) {
            parse_error(line_no, "schedule must be positive and strictly increasing");
          }
        }
      } else if (key == "degree") {
        s.degree = to_int<int>(value, line_no);
        if (s.degree < 0) parse_error(line_no, "degree must be >= 0");
      } else if (key == "boundary_indicator") {
        s.boundary_indicator = to_bool(value, line_no);
      } else if (key == "boundary_layer") {
        positive_double(s.boundary_layer);
      } else if (key == "outer_b_samples") {
        positive_int(s.outer_b_samples);
      } else if (key == "seed") {
        s.seed = to_int<std::uint64_t>(value, line_no);
      } else if (key == "teugels_m") {
        positive_int(cfg.solver.teugels_m);
      } else {
        parse_error(line_no, "unknown key '" + full + "'");
      }
    } else if (section == "suite") {
      auto& su = cfg.suite;
      if (key == "select") {
        su.selected.clear();
        for (auto w : split_words(value)) {
          if (w == "all") {
            su.selected.assign(std::begin(kAllSuites), std::end(kAllSuites));
            continue;
          }
          bool found = false;
          for (SuiteKind k : kAllSuites) {
            if (suite_name(k) == w) {
              for (SuiteKind prev : su.selected) {
                if (prev == k) parse_error(line_no, "suite '" + std::string(w) + "' selected twice");
              }
              su.selected.push_back(k);
              found = true;
            }
          }
          if (!found) parse_error(line_no, "unknown suite '" + std::string(w) + "'");
        }
      } else if (key == "strong_paths") {
        positive_size(su.strong_paths);
      } else if (key == "skorokhod_paths") {
        positive_size(su.skorokhod_paths);
      } else if (key == "fk_paths") {
        positive_size(su.fk_paths);
      } else if (key == "fk_steps") {
        positive_int(su.fk_steps);
      } else if (key == "fk_tolerance") {
        positive_double(su.fk_tolerance);
      } else if (key == "comparison_tolerance") {
        positive_double(su.comparison_tolerance);
      } else if (key == "comparison_max_fraction") {
        positive_double(su.comparison_max_fraction);
      } else if (key == "comparison_terminal_low") {
        su.comparison_terminal_low = to_choice(value, line_no);
        check_choice(su.comparison_terminal_low, line_no, make_terminal);
      } else if (key == "comparison_terminal_high") {
        su.comparison_terminal_high = to_choice(value, line_no);
        check_choice(su.comparison_terminal_high, line_no, make_terminal);
      } else if (key == "comparison_obstacle") {
        su.comparison_obstacle = to_choice(value, line_no);
        check_choice(su.comparison_obstacle, line_no, make_obstacle);
      } else if (key == "second_seed") {
        su.second_seed = to_int<std::uint64_t>(value, line_no);
      } else {
        parse_error(line_no, "unknown key '" + full + "'");
      }
    } else if (section == "output") {
      if (key == "dir") cfg.output_dir = std::string(value);
      else parse_error(line_no, "unknown key '" + full + "'");
    }
  }
  try {
    validate_config(cfg);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownCoefficientName || e.code() == ErrorCode::ConfigParseError) throw;
    parse_error(line_no, e.what());
  }
  return cfg;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto kv = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  out << "[levy]\n";
  kv("drift_b", format_number(c.levy.drift_b));
  kv("sigma", format_number(c.levy.sigma));
  kv("compensated", c.levy.compensated ? "true" : "false");
  for (const auto& a : c.levy.atoms) kv("atom", format_number(a.size) + " " + format_number(a.intensity));

  out << "\n[grid]\n";
  kv("horizon", format_number(c.grid.horizon));
  kv("n_steps", std::to_string(c.grid.n_steps));
  kv("fd_space_intervals", std::to_string(c.grid.fd_space_intervals));
  kv("fd_time_steps", std::to_string(c.grid.fd_time_steps));

  out << "\n[forward]\n";
  kv("theta", format_number(c.forward.theta));
  kv("x0", format_number(c.forward.x0));
  kv("sigma_x", format_choice(c.forward.sigma_x));
  kv("a_mode", c.forward.a_mode == AMode::LocalTime      ? "local_time"
               : c.forward.a_mode == AMode::IdentityTime ? "identity_time"
                                                         : "table");
  if (!c.forward.a_table.empty()) kv("a_table", format_numbers(c.forward.a_table));

  out << "\n[problem]\n";
  kv("driver", format_choice(c.problem.driver));
  kv("boundary", format_choice(c.problem.boundary));
  kv("noise", format_choice(c.problem.noise));
  kv("terminal", format_choice(c.problem.terminal));
  kv("obstacle", format_choice(c.problem.obstacle));
  kv("lipschitz_c", format_number(c.problem.lipschitz_c));
  kv("mono_beta", format_number(c.problem.mono_beta));

  const auto& s = c.solver.solver;
  out << "\n[solver]\n";
  kv("paths", std::to_string(s.n_paths));
  kv("mode", s.mode == ReflectionMode::Projection ? "projection" : "penalization");
  kv("penalization_n", format_number(s.penalization_n));
  kv("schedule", format_numbers(c.solver.schedule));
  kv("degree", std::to_string(s.degree));
  kv("boundary_indicator", s.boundary_indicator ? "true" : "false");
  kv("boundary_layer", format_number(s.boundary_layer));
  kv("outer_b_samples", std::to_string(s.outer_b_samples));
  kv("seed", std::to_string(s.seed));
  kv("teugels_m", std::to_string(c.solver.teugels_m));

  const auto& su = c.suite;
  out << "\n[suite]\n";
  std::string names;
  for (SuiteKind k : su.selected) {
    if (!names.empty()) names += ' ';
    names += suite_name(k);
  }
  if (!names.empty()) kv("select", names);
  kv("strong_paths", std::to_string(su.strong_paths));
  kv("skorokhod_paths", std::to_string(su.skorokhod_paths));
  kv("fk_paths", std::to_string(su.fk_paths));
  kv("fk_steps", std::to_string(su.fk_steps));
  kv("fk_tolerance", format_number(su.fk_tolerance));
  kv("comparison_tolerance", format_number(su.comparison_tolerance));
  kv("comparison_max_fraction", format_number(su.comparison_max_fraction));
  kv("comparison_terminal_low", format_choice(su.comparison_terminal_low));
  kv("comparison_terminal_high", format_choice(su.comparison_terminal_high));
  kv("comparison_obstacle", format_choice(su.comparison_obstacle));
  kv("second_seed", std::to_string(su.second_seed));

  out << "\n[output]\n";
  kv("dir", c.output_dir);
  return out.str();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigParseError, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.levy.drift_b = 0.1;
  c.levy.atoms = {{0.5, 1.0}, {-0.4, 1.5}};
  c.grid.n_steps = 100;
  c.suite.selected.assign(std::begin(kAllSuites), std::end(kAllSuites));
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (c.levy.atoms.empty() && !(c.levy.sigma > 0.0)) {
    throw Error(ErrorCode::ConfigParseError, "[levy] needs at least one atom or sigma > 0");
  }
  validate_levy_spec(c.levy);
  if (c.grid.n_steps < 1 || c.grid.fd_space_intervals < 2 || c.grid.fd_time_steps < 1 || !(c.grid.horizon > 0.0)) {
    throw Error(ErrorCode::ConfigParseError, "[grid] needs horizon > 0, n_steps >= 1, fd_space_intervals >= 2");
  }
  if (!(c.forward.theta > 0.0) || std::abs(c.forward.x0) > c.forward.theta) {
    throw Error(ErrorCode::ConfigParseError, "[forward] needs theta > 0 and |x0| <= theta");
  }
  if (c.forward.a_mode == AMode::UserTable &&
      c.forward.a_table.size() != static_cast<std::size_t>(c.grid.n_steps) + 1) {
    throw Error(ErrorCode::ConfigParseError, "[forward] a_table needs n_steps + 1 values");
  }
  make_sigma_x(c.forward.sigma_x);
  make_driver(c.problem.driver);
  make_boundary(c.problem.boundary);
  make_noise(c.problem.noise);
  make_terminal(c.problem.terminal);
  make_obstacle(c.problem.obstacle);
  make_terminal(c.suite.comparison_terminal_low);
  make_terminal(c.suite.comparison_terminal_high);
  make_obstacle(c.suite.comparison_obstacle);
  validate_solver_config(c.solver.solver);
  if (c.solver.schedule.empty()) throw Error(ErrorCode::ConfigParseError, "[solver] schedule is empty");
}

ForwardModel make_model(const ExperimentConfig& c, int n_steps) {
  return ForwardModel{validate_levy_spec(c.levy), TimeGrid(c.grid.horizon, n_steps), c.forward.theta,
                      c.forward.x0,  make_sigma_x(c.forward.sigma_x),          c.forward.a_mode,
                      c.forward.a_table};
}

ForwardModel make_model(const ExperimentConfig& c) { return make_model(c, c.grid.n_steps); }

ProblemSpec make_problem(const ExperimentConfig& c) {
  const auto f = make_driver(c.problem.driver);
  const auto phi = make_boundary(c.problem.boundary);
  const auto g = make_noise(c.problem.noise);
  ProblemSpec p;
  p.f = f.fn;
  p.phi = phi.fn;
  p.g = g.fn;
  p.terminal = make_terminal(c.problem.terminal);
  p.obstacle = make_obstacle(c.problem.obstacle);
  p.lipschitz_c = c.problem.lipschitz_c;
  p.mono_beta = c.problem.mono_beta;
  p.theta = c.forward.theta;
  p.f_depends_on_z = f.depends_on_z;
  p.g_is_zero = g.is_zero;
  p.g_depends_on_y = g.depends_on_y;
  return p;
}

TeugelsBasis make_basis(const ExperimentConfig& c) {
  return orthonormal_basis(build_mu(validate_levy_spec(c.levy)), c.solver.teugels_m);
}

}  // namespace bdsde
