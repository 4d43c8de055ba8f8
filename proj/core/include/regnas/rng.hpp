// SPDX-License-Identifier: Apache-2.0
//
// Counter-based hashing and a small SplitMix64 stream.
//
// Standard-library distributions are implementation defined, so every draw in
// this project goes through the helpers below. Results are identical on every
// platform and compiler.
#pragma once

#include <cstdint>
#include <initializer_list>

namespace regnas {

/// SplitMix64 output finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

/// Keyed hash of a counter tuple: h_0 = mix64(seed + golden),
/// h_{k+1} = mix64(h_k ^ (word_k + golden)). Used both for seed splitting and
/// for the synthetic evaluator's per-(sample, unit) deviates.
constexpr std::uint64_t hash_words(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = mix64(seed + kGolden);
  for (std::uint64_t w : words) h = mix64(h ^ (w + kGolden));
  return h;
}

/// Top 53 bits mapped to [0, 1).
constexpr double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Derives an independent child seed; the tag separates streams by purpose.
constexpr std::uint64_t split_seed(std::uint64_t seed, std::uint64_t tag,
                                   std::uint64_t index = 0) noexcept {
  return hash_words(seed, {tag, index});
}

class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept { return mix64(state_ += kGolden); }

  /// Uniform integer in [0, n); n must be positive. Rejection keeps it unbiased.
  constexpr std::uint64_t uniform_index(std::uint64_t n) noexcept {
    const std::uint64_t limit = -n % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = next();
      if (x >= limit) return x % n;
    }
  }

  constexpr double uniform01() noexcept { return to_unit_interval(next()); }

  /// Always consumes exactly one draw, including for p == 0 and p == 1.
  constexpr bool bernoulli(double p) noexcept { return uniform01() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace regnas
