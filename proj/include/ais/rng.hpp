#pragma once

#include <cstdint>
#include <random>

namespace ais {

/// Seeded 64-bit stream (std::mt19937_64). One instance per replicate.
/// Uniform variates use the top 53 bits, so streams are bit-reproducible
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ais
