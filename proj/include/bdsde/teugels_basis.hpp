#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "bdsde/levy_model.hpp"
#include "bdsde/time_grid.hpp"

namespace bdsde {

struct MeasureAtom {
  double location = 0.0;
  double weight = 0.0;

  bool operator==(const MeasureAtom&) const = default;
};

struct AtomicMeasure {
  std::vector<MeasureAtom> atoms;

  std::size_t size() const noexcept { return atoms.size(); }
  bool empty() const noexcept { return atoms.empty(); }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (const auto& a : atoms) sum += a.weight * f(a.location);
    return sum;
  }

  bool operator==(const AtomicMeasure&) const = default;
};

// mu(dx) = x^2 nu(dx) + sigma^2 delta_0(dx)
AtomicMeasure build_mu(const ValidatedLevySpec& spec);

// Orthonormal polynomials q_0, q_1, ... under mu and the Teugels coefficients
//   q_{i-1}(x) = c_{i,i} x^{i-1} + ... + c_{i,1},   p_i(x) = x q_{i-1}(x).
// Indices i, k below are 1-based to match c_{i,k}.
class TeugelsBasis {
 public:
  int requested() const noexcept { return static_cast<int>(coeffs_.rows()); }
  int rank() const noexcept { return rank_; }
  // First i with H^(i) identically zero, if any.
  std::optional<int> degenerate_from() const noexcept {
    if (rank_ < requested()) return rank_ + 1;
    return std::nullopt;
  }

  double coeff(int i, int k) const { return coeffs_(i - 1, k - 1); }
  // Row i-1 holds (c_{i,1}, ..., c_{i,i}, 0, ..., 0).
  const Eigen::MatrixXd& coeffs() const noexcept { return coeffs_; }
  const AtomicMeasure& measure() const noexcept { return mu_; }

  // q_{i-1}(x) for i in 1..requested.
  double q(int i, double x) const;
  // p_i(x) = x q_{i-1}(x).
  double p(int i, double x) const { return x * q(i, x); }

  // <q_{i-1}, q_{j-1}>_mu by exact summation over the atoms.
  double inner(int i, int j) const;
  // max_{i,j <= rank} |<q_{i-1}, q_{j-1}>_mu - delta_ij|
  double max_orthonormality_error() const;

 private:
  friend TeugelsBasis orthonormal_basis(const AtomicMeasure& mu, int requested_m);
  TeugelsBasis(Eigen::MatrixXd coeffs, int rank, AtomicMeasure mu)
      : coeffs_(std::move(coeffs)), rank_(rank), mu_(std::move(mu)) {}

  Eigen::MatrixXd coeffs_;
  int rank_ = 0;
  AtomicMeasure mu_;
};

inline constexpr double kGramSchmidtPivotTol = 1e-12;

// Modified Gram-Schmidt on 1, x, x^2, ... under mu. Throws Error{EmptyMeasure}.
TeugelsBasis orthonormal_basis(const AtomicMeasure& mu, int requested_m);

struct TeugelsIncrements {
  // dH(k, i-1) = H^(i)_{t_{k+1}} - H^(i)_{t_k}
  Eigen::MatrixXd dH;
};

// Power-jump increments and their compensators, combined through c_{i,k}:
//   dY^(1) = dL - dt E[L_1],  dY^(k) = sum (jump)^k - dt int y^k nu(dy)  (k >= 2)
//   dH^(i) = sum_k c_{i,k} dY^(k)
// Columns beyond the basis rank are exactly zero. Throws Error{RankMismatch}
// when the basis was not built from this spec's mu.
TeugelsIncrements teugels_increments(const LevyPath& path, const TimeGrid& grid,
                                     const ValidatedLevySpec& spec, const TeugelsBasis& basis);

}  // namespace bdsde
