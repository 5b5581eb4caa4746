#pragma once

#include <cstdint>
#include <random>

namespace semrl::rng {

// mt19937_64 output is fully specified by the standard; the helpers below
// avoid std::*_distribution, whose output is implementation-defined.
using Engine = std::mt19937_64;

// Independent streams split from one master seed.
enum class Stream : std::uint64_t {
  kDynamics = 1,
  kNuisance = 2,
  kAmbiguity = 3,
  kExploration = 4,
  kTexture = 5,
  kInit = 6,
  kMinibatch = 7,
  kEpisode = 8,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t master, std::uint64_t tag) {
  return splitmix64(splitmix64(master) ^ splitmix64(tag * 0xD6E8FEB86659FD93ULL + 1));
}

inline std::uint64_t derive(std::uint64_t master, Stream stream) {
  return derive(master, static_cast<std::uint64_t>(stream));
}

inline Engine make_engine(std::uint64_t master, Stream stream) {
  return Engine(derive(master, stream));
}

// Unbiased integer in [0, n). n must be > 0.
inline std::uint64_t below(Engine& eng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = eng();
  while (x >= limit) x = eng();
  return x % n;
}

inline int below(Engine& eng, int n) {
  return static_cast<int>(below(eng, static_cast<std::uint64_t>(n)));
}

// Double in [0, 1) with 53 random bits.
inline double unit(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * unit(eng);
}

}  // namespace semrl::rng
