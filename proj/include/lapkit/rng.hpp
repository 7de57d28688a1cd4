// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace lapkit::rng {

/// Generator identity recorded in reports. Bump on any change to the
/// derivation below; fixtures built under different versions differ.
inline constexpr const char* kGeneratorName = "lapkit-splitmix-counter";
inline constexpr int kGeneratorVersion = 1;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based stream.
///
/// Word k of stream s under seed q is
///   mix64(key + k * 0x9E3779B97F4A7C15),  key = mix64(q ^ mix64(s)).
/// Each matrix gets its own stream id and each entry its own counter range,
/// so any entry can be regenerated without replaying the others and the
/// sequence is identical in every language that implements 64-bit wrapping
/// arithmetic.
class Stream {
 public:
  constexpr Stream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(mix64(seed ^ mix64(stream_id))) {}

  constexpr std::uint64_t word(std::uint64_t counter) const {
    return mix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(word(counter) >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(counter);
  }

  /// Standard normal via Box-Muller on counters 2k and 2k+1.
  double normal(std::uint64_t k) const {
    const double u1 = 1.0 - uniform(2 * k);  // (0, 1]
    const double u2 = uniform(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::uint64_t key_;
};

// Stream ids used by the model factory.
inline constexpr std::uint64_t kStreamUnitary = 1;
inline constexpr std::uint64_t kStreamSpectrum = 2;
inline constexpr std::uint64_t kStreamPotential = 3;
inline constexpr std::uint64_t kStreamHermitian = 4;
inline constexpr std::uint64_t kStreamRiggingLeft = 5;
inline constexpr std::uint64_t kStreamRiggingRight = 6;
inline constexpr std::uint64_t kStreamRiggingSingular = 7;
inline constexpr std::uint64_t kStreamCombination = 8;
inline constexpr std::uint64_t kStreamDirection = 9;

}  // namespace lapkit::rng
