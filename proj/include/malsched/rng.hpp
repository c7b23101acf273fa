#pragma once

#include <cmath>
#include <cstdint>

namespace malsched {

/// SplitMix64: a counter-based 64-bit generator. Output n is mix(seed' + n*gamma)
/// where seed' = mix(seed). Replication r of a run uses seed base_seed + r, so
/// streams are fixed functions of (base_seed, r) and never share state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : counter_(mix(seed)) {}

  std::uint64_t next() {
    counter_ += kGamma;
    return mix(counter_);
  }

  /// Uniform in (0, 1): never returns 0, so -log(u) is finite.
  double uniform_open() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t counter_;
};

}  // namespace malsched
