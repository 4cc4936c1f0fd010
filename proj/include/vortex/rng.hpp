#ifndef VORTEX_RNG_HPP
#define VORTEX_RNG_HPP

#include <cstdint>

#include "vortex/common.hpp"

namespace vortex {

// SplitMix64, used to expand seeds and derive independent streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ with a Box-Muller normal sampler. Streams are cheap value
/// types; sampling order is part of the reproducibility contract.
class Rng {
 public:
  Rng() : Rng(0, 0, 0) {}

  /// Stream derivation rule (documented interface): the state is seeded by
  /// SplitMix64 runs over master_seed, then purpose, then index. Distinct
  /// (purpose, index) pairs give statistically independent streams.
  Rng(std::uint64_t master_seed, std::uint64_t purpose, std::uint64_t index) {
    std::uint64_t sm = master_seed;
    (void)splitmix64(sm);
    sm ^= 0x9e3779b97f4a7c15ULL * (purpose + 1);
    (void)splitmix64(sm);
    sm ^= 0xbf58476d1ce4e5b9ULL * (index + 1);
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in (0, 1); never returns 0 so logs are safe.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; one spare value cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = kTwoPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec2 normal_vec2() {
    const double a = normal();
    const double b = normal();
    return {a, b};
  }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t s_[4]{};
  bool have_spare_{false};
  double spare_{0.0};
};

// Stream purposes; values are part of the on-disk reproducibility story.
enum class StreamPurpose : std::uint64_t {
  kInitialSample = 1,
  kIndividualNoise = 2,
  kCommonNoise = 3,
  kKrSampling = 4,
  kPropertyTest = 5,
};

inline Rng make_stream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index) {
  return Rng(master_seed, static_cast<std::uint64_t>(purpose), index);
}

/// Run ordinal for (N-index, seed-index) pairs in a sweep; keeps every run's
/// streams a pure function of (master seed, position in the sweep).
inline std::uint64_t run_ordinal(std::uint64_t n_index, std::uint64_t seed_index) {
  return n_index * 65536ULL + seed_index;
}

/// Double-precision inverse standard normal CDF: a rough rational initial
/// guess polished by two Halley steps on erfc. Good to ~1e-15 over (0,1).
double inverse_normal_cdf(double p);

}  // namespace vortex

#endif
