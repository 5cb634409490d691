#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Random number utilities. Engines come from the standard library; the
// distribution transforms are spelled out explicitly because the standard
// leaves distribution algorithms implementation-defined, and every sampled
// figure in this project must be reproducible from a seed alone.

namespace edgeplan::rng {

using Stream = std::mt19937_64;

// Stream purposes. Derived seeds mix the purpose and an index into the base
// seed so that every (purpose, index) pair gets a decorrelated stream and the
// order in which streams are consumed cannot matter.
inline constexpr std::uint64_t kScenario = 1;
inline constexpr std::uint64_t kAnalytics = 2;
inline constexpr std::uint64_t kSimArrival = 3;
inline constexpr std::uint64_t kSimGain = 4;
inline constexpr std::uint64_t kEnsemble = 5;

// splitmix64 finalizer.
inline std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose,
                                 std::uint64_t index = 0) {
  std::uint64_t z = seed;
  z = mix(z + 0x9E3779B97F4A7C15ULL * (purpose + 1));
  z = mix(z + 0x9E3779B97F4A7C15ULL * (index + 1));
  return z;
}

inline Stream make_stream(std::uint64_t seed, std::uint64_t purpose,
                          std::uint64_t index = 0) {
  return Stream(derive_seed(seed, purpose, index));
}

// Uniform in [0, 1) with 53 random bits.
inline double canonical(Stream& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(Stream& g, double lo, double hi) {
  return lo + (hi - lo) * canonical(g);
}

inline double exponential(Stream& g, double rate) {
  return -std::log1p(-canonical(g)) / rate;
}

// Box-Muller; consumes two uniforms per call.
inline double normal(Stream& g) {
  double u1 = canonical(g);
  while (u1 <= 0.0) u1 = canonical(g);
  const double u2 = canonical(g);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Rayleigh-distributed amplitude with the usual sigma parameter.
inline double rayleigh(Stream& g, double scale) {
  return scale * std::sqrt(-2.0 * std::log1p(-canonical(g)));
}

inline double lognormal(Stream& g, double location, double scale) {
  return std::exp(location + scale * normal(g));
}

}  // namespace edgeplan::rng
