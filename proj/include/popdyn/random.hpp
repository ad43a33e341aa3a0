#pragma once

#include <cstdint>
#include <random>

namespace popdyn {

using Rng = std::mt19937_64;

/// Derives an independent generator for replicate `stream` of a run seeded
/// with `seed`. The rule is splitmix64(seed ^ splitmix64(stream + 1)), so
/// stream 0 of seed s is not the same generator as Rng(s).
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

std::uint64_t splitmix64(std::uint64_t x);

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline bool bernoulli(Rng& rng, double p) {
  return uniform01(rng) < p;
}

}  // namespace popdyn
