#include "bdsde/teugels_basis.hpp"

#include <cmath>
#include <sstream>

#include "bdsde/errors.hpp"

namespace bdsde {

AtomicMeasure build_mu(const ValidatedLevySpec& spec) {
  AtomicMeasure mu;
  mu.atoms.reserve(spec.atom_count() + 1);
  for (const auto& a : spec.atoms()) {
    mu.atoms.push_back({a.size, a.intensity * a.size * a.size});
  }
  if (spec.continuous_part()) mu.atoms.push_back({0.0, spec.sigma() * spec.sigma()});
  return mu;
}

double TeugelsBasis::q(int i, double x) const {
  // Horner on c_{i,i} x^{i-1} + ... + c_{i,1}
  double value = 0.0;
  for (int k = i; k >= 1; --k) value = value * x + coeffs_(i - 1, k - 1);
  return value;
}

double TeugelsBasis::inner(int i, int j) const {
  return mu_.integrate([&](double x) { return q(i, x) * q(j, x); });
}

double TeugelsBasis::max_orthonormality_error() const {
  double worst = 0.0;
  for (int i = 1; i <= rank_; ++i) {
    for (int j = 1; j <= rank_; ++j) {
      worst = std::max(worst, std::abs(inner(i, j) - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

TeugelsBasis orthonormal_basis(const AtomicMeasure& mu, int requested_m) {
  if (requested_m < 1) throw Error(ErrorCode::InvalidArgument, "requested_m must be >= 1");
  if (mu.empty()) throw Error(ErrorCode::EmptyMeasure, "mu has no atoms");

  const auto n_atoms = static_cast<Eigen::Index>(mu.size());
  const auto m = static_cast<Eigen::Index>(requested_m);
  Eigen::VectorXd locations(n_atoms), weights(n_atoms);
  for (Eigen::Index a = 0; a < n_atoms; ++a) {
    locations(a) = mu.atoms[static_cast<std::size_t>(a)].location;
    weights(a) = mu.atoms[static_cast<std::size_t>(a)].weight;
  }
  auto dot = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return (weights.array() * u.array() * v.array()).sum();
  };

  // values(., r) holds q_r at the atoms; coeffs row r holds its monomial coefficients.
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n_atoms, m);
  Eigen::VectorXd monomial = Eigen::VectorXd::Ones(n_atoms);
  int rank = 0;

  for (Eigen::Index r = 0; r < m; ++r) {
    if (r >= n_atoms) break;  // structural: at most #atoms independent polynomials
    if (r > 0) monomial = monomial.cwiseProduct(locations);
    const double leading = dot(monomial, monomial);

    Eigen::VectorXd v = monomial;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
    c(r) = 1.0;
    // Two MGS sweeps keep the exact-quadrature orthonormality at round-off level.
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (Eigen::Index s = 0; s < r; ++s) {
        const double proj = dot(v, values.col(s));
        v -= proj * values.col(s);
        c -= proj * coeffs.row(s).transpose();
      }
    }
    const double norm2 = dot(v, v);
    if (!(norm2 > kGramSchmidtPivotTol * leading)) break;
    const double norm = std::sqrt(norm2);
    values.col(r) = v / norm;
    coeffs.row(r) = (c / norm).transpose();
    ++rank;
  }
  return TeugelsBasis(std::move(coeffs), rank, mu);
}

TeugelsIncrements teugels_increments(const LevyPath& path, const TimeGrid& grid,
                                     const ValidatedLevySpec& spec, const TeugelsBasis& basis) {
  const AtomicMeasure mu = build_mu(spec);
  if (!(basis.measure() == mu) || basis.rank() > static_cast<int>(mu.size())) {
    throw Error(ErrorCode::RankMismatch, "Teugels basis was built from a different measure");
  }
  if (path.L.size() != grid.n_nodes()) {
    throw Error(ErrorCode::InvalidArgument, "Levy path length does not match the grid");
  }

  const int rank = basis.rank();
  const int n = grid.n_steps();
  const double dt = grid.dt();
  const MomentTable moments = levy_moments(spec, std::max(rank, 1));

  TeugelsIncrements out;
  out.dH = Eigen::MatrixXd::Zero(n, basis.requested());
  if (rank == 0) return out;

  // dY(k, j-1) = increment of the compensated power-jump process Y^(j)
  Eigen::MatrixXd dY = Eigen::MatrixXd::Zero(n, rank);
  for (int k = 0; k < n; ++k) {
    dY(k, 0) = (path.L[static_cast<std::size_t>(k) + 1] - path.L[static_cast<std::size_t>(k)]) -
               dt * moments.mean_L1;
    for (int j = 2; j <= rank; ++j) dY(k, j - 1) = -dt * moments.raw_moments[static_cast<std::size_t>(j)];
  }
  for (const auto& jump : path.jumps) {
    double power = jump.size;
    for (int j = 2; j <= rank; ++j) {
      power *= jump.size;
      dY(jump.step, j - 1) += power;
    }
  }

  for (int i = 1; i <= rank; ++i) {
    for (int k = 1; k <= i; ++k) {
      const double c = basis.coeff(i, k);
      if (c != 0.0) out.dH.col(i - 1) += c * dY.col(k - 1);
    }
  }
  return out;
}

}  // namespace bdsde
