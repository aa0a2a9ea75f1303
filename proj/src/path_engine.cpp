#include "bdsde/path_engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bdsde/errors.hpp"
#include "bdsde/parallel.hpp"
#include "bdsde/rng.hpp"

namespace bdsde {

std::vector<double> simulate_brownian(const TimeGrid& grid, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt()));
  std::vector<double> B(grid.n_nodes(), 0.0);
  for (std::size_t k = 1; k < B.size(); ++k) B[k] = B[k - 1] + normal(rng);
  return B;
}

LevyPath simulate_levy(const ValidatedLevySpec& spec, const TimeGrid& grid, std::uint64_t seed) {
  Rng rng(seed);
  const double T = grid.horizon();
  const int n = grid.n_steps();
  LevyPath path;

  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t a = 0; a < spec.atom_count(); ++a) {
    const auto& atom = spec.atoms()[a];
    std::poisson_distribution<long> count_dist(atom.intensity * T);
    const long count = count_dist(rng);
    for (long j = 0; j < count; ++j) {
      const double u = uniform(rng);
      const int step = std::min(static_cast<int>(u * n), n - 1);
      path.jumps.push_back({step, u * T, atom.size, static_cast<int>(a)});
    }
  }
  std::sort(path.jumps.begin(), path.jumps.end(),
            [](const JumpEvent& x, const JumpEvent& y) { return x.time < y.time; });

  std::vector<double> jump_sum(static_cast<std::size_t>(n), 0.0);
  for (const auto& j : path.jumps) jump_sum[static_cast<std::size_t>(j.step)] += j.size;

  const double drift = spec.continuous_drift();
  path.L.assign(grid.n_nodes(), 0.0);
  double brownian = 0.0;
  double jumps = 0.0;
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt()));
  for (int k = 1; k <= n; ++k) {
    jumps += jump_sum[static_cast<std::size_t>(k - 1)];
    if (spec.continuous_part()) brownian += normal(rng);
    path.L[static_cast<std::size_t>(k)] = drift * grid.t(k) + spec.sigma() * brownian + jumps;
  }
  return path;
}

ReflectedPath simulate_reflected_x(const ForwardCoefficient& sigma_x, double theta, double x0,
                                   std::span<const double> L) {
  if (!(theta > 0.0)) throw Error(ErrorCode::InvalidArgument, "theta must be > 0");
  if (!(x0 >= -theta && x0 <= theta)) {
    throw Error(ErrorCode::InitialPointOutsideDomain, "x0 must lie in [-theta, theta]");
  }
  if (L.empty()) throw Error(ErrorCode::InvalidArgument, "empty Levy path");

  const std::size_t n_nodes = L.size();
  ReflectedPath out;
  out.X.assign(n_nodes, x0);
  out.eta_abs.assign(n_nodes, 0.0);
  out.eta_sign.assign(n_nodes - 1, 0);
  for (std::size_t k = 0; k + 1 < n_nodes; ++k) {
    const double x = out.X[k];
    const double unreflected = x + sigma_x(x) * (L[k + 1] - L[k]);
    const double projected = std::clamp(unreflected, -theta, theta);
    const double push = std::abs(unreflected - projected);
    out.X[k + 1] = projected;
    out.eta_abs[k + 1] = out.eta_abs[k] + push;
    if (push > 0.0) out.eta_sign[k] = boundary_direction(projected, theta);
  }
  return out;
}

std::vector<double> assemble_A(AMode mode, const TimeGrid& grid, const ReflectedPath& reflected,
                               std::span<const double> user_table) {
  switch (mode) {
    case AMode::IdentityTime:
      return grid.nodes();
    case AMode::LocalTime:
      return reflected.eta_abs;
    case AMode::UserTable: {
      if (user_table.size() != grid.n_nodes()) {
        throw Error(ErrorCode::InvalidArgument, "user A table must have one value per grid node");
      }
      if (user_table[0] != 0.0) throw Error(ErrorCode::NonMonotoneUserTable, "A_0 must be 0");
      for (std::size_t k = 1; k < user_table.size(); ++k) {
        if (!(user_table[k] >= user_table[k - 1])) {
          throw Error(ErrorCode::NonMonotoneUserTable, "user A table decreases at node " + std::to_string(k));
        }
      }
      return {user_table.begin(), user_table.end()};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown A mode");
}

PathBundle simulate_path(const ForwardModel& model, const TeugelsBasis& basis,
                         std::vector<double> brownian, std::uint64_t levy_seed) {
  if (brownian.size() != model.grid.n_nodes()) {
    throw Error(ErrorCode::InvalidArgument, "Brownian path length does not match the grid");
  }
  LevyPath levy = simulate_levy(model.levy, model.grid, levy_seed);
  ReflectedPath reflected = simulate_reflected_x(model.sigma_x, model.theta, model.x0, levy.L);
  std::vector<double> A = assemble_A(model.a_mode, model.grid, reflected, model.a_table);
  TeugelsIncrements dH = teugels_increments(levy, model.grid, model.levy, basis);
  return PathBundle{model.grid,
                    std::move(brownian),
                    std::move(levy.L),
                    std::move(levy.jumps),
                    std::move(reflected.X),
                    std::move(reflected.eta_abs),
                    std::move(reflected.eta_sign),
                    std::move(A),
                    std::move(dH)};
}

PathEnsemble simulate_ensemble(const ForwardModel& model, const TeugelsBasis& basis,
                               std::size_t n_paths, std::uint64_t master_seed,
                               std::uint64_t outer_index) {
  if (n_paths == 0) throw Error(ErrorCode::InvalidArgument, "n_paths must be >= 1");
  const auto rows = static_cast<Eigen::Index>(n_paths);
  const auto nodes = static_cast<Eigen::Index>(model.grid.n_nodes());
  const auto steps = static_cast<Eigen::Index>(model.grid.n_steps());

  PathEnsemble ens{model.grid,
                   simulate_brownian(model.grid, brownian_seed(master_seed, outer_index)),
                   Eigen::MatrixXd(rows, nodes),
                   Eigen::MatrixXd(rows, nodes),
                   std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(basis.requested()),
                                                Eigen::MatrixXd(rows, steps)),
                   basis.rank()};

  parallel_for(n_paths, [&](std::size_t p) {
    const PathBundle path = simulate_path(model, basis, ens.B, levy_seed(master_seed, outer_index, p));
    const auto r = static_cast<Eigen::Index>(p);
    for (Eigen::Index k = 0; k < nodes; ++k) {
      ens.X(r, k) = path.X[static_cast<std::size_t>(k)];
      ens.A(r, k) = path.A[static_cast<std::size_t>(k)];
    }
    for (std::size_t i = 0; i < ens.dH.size(); ++i) {
      ens.dH[i].row(r) = path.dH.dH.col(static_cast<Eigen::Index>(i)).transpose();
    }
  });
  return ens;
}

double skorokhod_pairing(const ReflectedPath& reflected, std::span<const double> V, double theta) {
  if (V.size() != reflected.X.size()) {
    throw Error(ErrorCode::InvalidArgument, "comparison path length does not match X");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < reflected.X.size(); ++k) {
    const double push = reflected.eta_abs[k + 1] - reflected.eta_abs[k];
    if (push == 0.0) continue;
    const double outward = -static_cast<double>(boundary_direction(reflected.X[k + 1], theta));
    sum += (reflected.X[k + 1] - V[k + 1]) * outward * push;
  }
  return sum;
}

}  // namespace bdsde
