#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace randbal {

// Master seed plus a derivation rule: a (domain, index) pair names an
// independent substream, so draw number k of replicate r is the same bits
// no matter how replicates are scheduled across threads.
struct SeedSpec {
  std::uint64_t master = 0;
};

// Domain tags keep unrelated uses of one master seed from colliding
// (e.g. Monte Carlo replicate 7 vs. study replicate 7).
enum class StreamDomain : std::uint64_t {
  mc_midp = 1,
  study_covariates = 2,
  study_replicate = 3,
  power_replicate = 4,
  generic = 5,
};

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// xoshiro256++ seeded through splitmix64. Hand-rolled rather than
// <random> because engine+distribution output must be bit-identical
// across platforms and standard libraries for reproducible reports.
class Rng {
 public:
  Rng(SeedSpec seed, StreamDomain domain, std::uint64_t index) {
    std::uint64_t key = seed.master;
    std::uint64_t mixed = splitmix64_next(key);
    mixed ^= (static_cast<std::uint64_t>(domain) + 1) * 0xA3EC647659359ACDull;
    mixed ^= index * 0xC2B2AE3D27D4EB4Full + 0x165667B19E3779F9ull;
    for (auto& word : s_) word = splitmix64_next(mixed);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9E3779B97F4A7C15ull;
  }

  std::uint64_t next() {
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

  // Uniform integer in [0, bound), bound >= 1. Lemire's nearly
  // divisionless method; unbiased.
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via the Marsaglia polar method (no libm trig).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    have_spare_ = true;
    return u * scale;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace randbal
