#include "bdsde/levy_model.hpp"

#include <cmath>
#include <sstream>

#include "bdsde/errors.hpp"

namespace bdsde {

double ValidatedLevySpec::total_intensity() const noexcept {
  double total = 0.0;
  for (const auto& a : spec_.atoms) total += a.intensity;
  return total;
}

double ValidatedLevySpec::mean_L1() const noexcept {
  double mean = spec_.drift_b;
  for (const auto& a : spec_.atoms) {
    if (!spec_.compensated || std::abs(a.size) > 1.0) mean += a.intensity * a.size;
  }
  return mean;
}

double ValidatedLevySpec::continuous_drift() const noexcept {
  double drift = spec_.drift_b;
  if (spec_.compensated) {
    for (const auto& a : spec_.atoms) {
      if (std::abs(a.size) <= 1.0) drift -= a.intensity * a.size;
    }
  }
  return drift;
}

ValidatedLevySpec validate_levy_spec(const LevySpec& spec) {
  if (!std::isfinite(spec.drift_b) || !std::isfinite(spec.sigma) || spec.sigma < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "drift must be finite and sigma finite and >= 0");
  }
  for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
    const auto& a = spec.atoms[i];
    if (!std::isfinite(a.size) || !std::isfinite(a.intensity)) {
      throw Error(ErrorCode::InvalidArgument, "non-finite atom");
    }
    if (a.size == 0.0) {
      std::ostringstream msg;
      msg << "atom " << i << " has jump size 0";
      throw Error(ErrorCode::ZeroJumpSize, msg.str());
    }
    if (!(a.intensity > 0.0)) {
      std::ostringstream msg;
      msg << "atom " << i << " has intensity " << a.intensity;
      throw Error(ErrorCode::NonpositiveIntensity, msg.str());
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.atoms[j].size == a.size) {
        std::ostringstream msg;
        msg << "jump size " << a.size << " appears at atoms " << j << " and " << i;
        throw Error(ErrorCode::DuplicateJumpSize, msg.str());
      }
    }
  }
  return ValidatedLevySpec(spec);
}

MomentTable levy_moments(const ValidatedLevySpec& spec, int max_order) {
  if (max_order < 1) throw Error(ErrorCode::InvalidArgument, "max_order must be >= 1");
  MomentTable table;
  table.raw_moments.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
  for (const auto& a : spec.atoms()) {
    double power = 1.0;
    for (int i = 0; i <= max_order; ++i) {
      table.raw_moments[static_cast<std::size_t>(i)] += a.intensity * power;
      power *= a.size;
    }
  }
  table.mean_L1 = spec.mean_L1();
  table.effective_drift = table.mean_L1;
  table.compensated = spec.compensated();
  return table;
}

}  // namespace bdsde
