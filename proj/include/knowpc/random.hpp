#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace knowpc {

using Rng = std::mt19937_64;

// Mixes a base seed with stream coordinates (generation, candidate, episode,
// ...) so every sub-run has an independent, reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  for (auto p : parts) h = mix(h ^ mix(p));
  return h;
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace knowpc
