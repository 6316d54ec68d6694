#pragma once

#include <cmath>
#include <cstdint>

namespace qsdw {

// SplitMix64: tiny, seedable, reproducible across platforms.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1]; never returns 0 so logs are safe.
  double uniform01() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }
};

// Key-mixed stream: the draw for a given (seed, key) pair is independent of
// any other key, so per-mode data survives resolution changes unchanged.
inline std::uint64_t mix_keys(std::uint64_t seed, std::uint64_t key) {
  SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ull * (key + 1)));
  return g.next();
}

inline double keyed_normal(std::uint64_t seed, std::uint64_t key) {
  SplitMix64 g(mix_keys(seed, key));
  return g.normal();
}

inline double keyed_uniform(std::uint64_t seed, std::uint64_t key) {
  SplitMix64 g(mix_keys(seed, key));
  return g.uniform01();
}

}  // namespace qsdw
