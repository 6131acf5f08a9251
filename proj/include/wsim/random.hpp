#pragma once

#include <cstdint>
#include <random>

// Seeded randomness with explicit stream derivation, so every stochastic
// result is a pure function of (seed, stream index) and independent of how
// other streams were consumed.

namespace wsim::random {

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  return Engine(seq);
}

inline Engine make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Engine(seq);
}

inline double uniform01(Engine& eng) {
  // 53-bit mantissa from the top of the 64-bit word.
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Poisson sampler implemented locally (multiplication method for small
// means, Hormann's PTRS transformed rejection for large ones) so that a
// given (seed, lambda) sequence reproduces across standard libraries.
double poisson_sample(Engine& eng, double lambda);

}  // namespace wsim::random
