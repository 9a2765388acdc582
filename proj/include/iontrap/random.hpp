#pragma once

#include <cmath>
#include <cstdint>

#include "iontrap/constants.hpp"

namespace iontrap {

/// Counter-based generator: the stream for sample `index` depends only on
/// (seed, index), so Monte-Carlo results do not depend on how the samples
/// are split across threads. SplitMix64 underneath.
class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, std::uint64_t index)
      : state_(mix(seed + 0x9E3779B97F4A7C15ULL * (mix(index) | 1ULL))) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal (Box-Muller, second variate cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(constants::two_pi * u2);
    has_spare_ = true;
    return r * std::cos(constants::two_pi * u2);
  }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace iontrap
