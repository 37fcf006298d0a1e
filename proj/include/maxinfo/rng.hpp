#pragma once

#include <cstdint>
#include <random>

namespace maxinfo {

using Rng = std::mt19937_64;

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Independent stream derived from one root seed and a fixed stream id.
inline Rng make_rng(std::uint64_t root_seed, std::uint64_t stream) {
  return Rng(mix64(mix64(root_seed) + stream));
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline std::uint64_t uniform_u64(Rng& rng) { return rng(); }

}  // namespace maxinfo
