#pragma once

#include <cstddef>
#include <vector>

namespace bdsde {

struct JumpAtom {
  double size = 0.0;       // jump size beta_i, nonzero
  double intensity = 0.0;  // alpha_i > 0

  bool operator==(const JumpAtom&) const = default;
};

// Levy driver with an atomic Levy measure sum_i alpha_i delta_{beta_i}.
//
// `drift_b` is the drift of the representation selected by `compensated`:
//   compensated = false : L_t = b t + sigma W_t + sum of all jumps
//   compensated = true  : L_t = b t + sigma W_t + compensated jumps with |beta| <= 1
//                                                + raw jumps with |beta| > 1
struct LevySpec {
  double drift_b = 0.0;
  double sigma = 0.0;
  std::vector<JumpAtom> atoms;
  bool compensated = false;

  bool operator==(const LevySpec&) const = default;
};

class ValidatedLevySpec {
 public:
  const LevySpec& spec() const noexcept { return spec_; }
  const std::vector<JumpAtom>& atoms() const noexcept { return spec_.atoms; }
  std::size_t atom_count() const noexcept { return spec_.atoms.size(); }
  bool continuous_part() const noexcept { return spec_.sigma > 0.0; }
  double sigma() const noexcept { return spec_.sigma; }
  bool compensated() const noexcept { return spec_.compensated; }

  // nu(R) = sum alpha_i
  double total_intensity() const noexcept;
  // E[L_1]
  double mean_L1() const noexcept;
  // Deterministic drift of L between jumps.
  double continuous_drift() const noexcept;

 private:
  friend ValidatedLevySpec validate_levy_spec(const LevySpec& spec);
  explicit ValidatedLevySpec(LevySpec spec) : spec_(std::move(spec)) {}

  LevySpec spec_;
};

// Throws Error{DuplicateJumpSize | ZeroJumpSize | NonpositiveIntensity | InvalidArgument}.
ValidatedLevySpec validate_levy_spec(const LevySpec& spec);

struct MomentTable {
  // raw_moments[i] = int y^i nu(dy) = sum_k alpha_k beta_k^i, i = 0..max_order
  // (entry 0 is the total intensity).
  std::vector<double> raw_moments;
  double mean_L1 = 0.0;
  // a' = E[L_1], the transport coefficient in front of sigma(x) du/dx once the
  // jump part is written with the compensated integrand u^1.
  double effective_drift = 0.0;
  bool compensated = false;
};

MomentTable levy_moments(const ValidatedLevySpec& spec, int max_order);

}  // namespace bdsde
