#pragma once

// Counter-derived random streams. Every random draw in a run comes from a
// stream keyed by (master seed, step, phase, index), so results do not depend
// on how particles are scheduled across threads.

#include <array>
#include <cstdint>
#include <limits>

namespace smc {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  std::uint64_t s = h ^ (v * 0xD6E8FEB86659FD93ULL + 0x9E3779B97F4A7C15ULL);
  return splitmix64(s);
}

/// xoshiro256++; satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t seed = 0) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_{};
};

/// Phases of a sampler step; each owns a disjoint family of streams.
enum class Phase : std::uint64_t {
  init = 1,
  tune_init = 2,
  tune_explore = 3,
  tune_select = 4,
  resample = 5,
  move = 1000,  // move + k for sweep k
};

inline Rng make_stream(std::uint64_t seed, std::uint64_t step, std::uint64_t phase,
                       std::uint64_t index) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  h = hash_combine(h, step);
  h = hash_combine(h, phase);
  h = hash_combine(h, index);
  return Rng(h);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t step, Phase phase, std::uint64_t index,
                       std::uint64_t phase_offset = 0) {
  return make_stream(seed, step, static_cast<std::uint64_t>(phase) + phase_offset, index);
}

}  // namespace smc
