#pragma once

// Portable pseudo-random number generation.
//
// Every random choice that ends up in a fixture (circuit contents, noise
// trajectories, optimizer perturbations) goes through Xoshiro256 seeded by
// SplitMix64, so results are bit-identical across compilers and platforms.
// <random> distributions are implementation-defined and are not used here.

#include <array>
#include <cstdint>
#include <limits>

namespace qmini {

/// SplitMix64 (Steele, Lea, Flood 2014). Used for seeding and seed mixing.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a stream index.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  SplitMix64 mix(base ^ (stream * 0xD1B54A32D192ED03ULL));
  mix.next();
  return mix.next();
}

/// xoshiro256** 1.0 (Blackman, Vigna).
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256(std::uint64_t seed) noexcept : state_{} {
    SplitMix64 seeder(seed);
    for (auto& word : state_) word = seeder.next();
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept { return next(); }

  constexpr std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 bits of randomness.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Unbiased uniform integer in [0, bound). `bound` must be non-zero.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    // Rejection on the top of the range keeps every residue equally likely.
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  constexpr bool coin() noexcept { return (next() >> 63) != 0; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
};

}  // namespace qmini
