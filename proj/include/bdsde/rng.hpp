#pragma once

#include <cstdint>
#include <random>

namespace bdsde {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used only to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed of child stream `index` under `parent`. All randomness in the project
// flows from one master seed through this function:
//   Brownian path of outer sample o   : derive_seed(derive_seed(master, kBrownianStream), o)
//   Levy path p of outer sample o     : derive_seed(derive_seed(derive_seed(master, kLevyStream), o), p)
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

inline constexpr std::uint64_t kBrownianStream = 1;
inline constexpr std::uint64_t kLevyStream = 2;
inline constexpr std::uint64_t kAuxiliaryStream = 3;

inline std::uint64_t brownian_seed(std::uint64_t master, std::uint64_t outer) {
  return derive_seed(derive_seed(master, kBrownianStream), outer);
}

inline std::uint64_t levy_seed(std::uint64_t master, std::uint64_t outer, std::uint64_t path) {
  return derive_seed(derive_seed(derive_seed(master, kLevyStream), outer), path);
}

}  // namespace bdsde
