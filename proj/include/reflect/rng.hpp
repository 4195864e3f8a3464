#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace reflect::rng {

/// SplitMix64 step; also used as the mixing function for stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream key from a user seed and a tag tuple
/// (process component, coordinate, ...). Counter-based: the same
/// (seed, tags) always yields the same key, and distinct tags decorrelate,
/// so changing one coordinate's law never perturbs another's draws.
inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = seed ^ 0xA02B'D4E7'63D5'1C8FULL;
  std::uint64_t key = splitmix64(s);
  for (std::uint64_t t : tags) {
    s ^= t + 0x9E3779B97F4A7C15ULL + (key << 6) + (key >> 2);
    key = splitmix64(s);
  }
  return key;
}

/// xoshiro256++ (Blackman & Vigna), seeded via SplitMix64 from a stream key.
/// Bit-identical across platforms.
class Stream {
 public:
  explicit Stream(std::uint64_t key) {
    for (auto& w : s_) w = splitmix64(key);
    s_[0] |= 1ULL;  // never the all-zero state
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

  /// Uniform on [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform01_open_low() { return 1.0 - uniform01(); }

  /// Exponential with the given rate > 0.
  double exponential(double rate) { return -std::log(uniform01_open_low()) / rate; }

  /// Standard normal via Box-Muller; generates pairs and caches the second.
  double normal() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform01_open_low()));
    const double theta = 6.283185307179586476925286766559 * uniform01();
    cache_ = r * std::sin(theta);
    has_cache_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
  bool has_cache_ = false;
  double cache_ = 0.0;
};

inline Stream make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  return Stream(derive_key(seed, tags));
}

}  // namespace reflect::rng
