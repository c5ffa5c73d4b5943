#pragma once

#include <cmath>
#include <cstdint>

#include "kineticlab/common.hpp"

namespace kb {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so sampling is reproducible independently of
// evaluation order or thread schedule.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

  uint64_t bits(uint64_t counter) const {
    uint64_t z = seed_ + 0x9e3779b97f4a7c15ull * (stream_ + 1);
    z ^= counter + 0xbf58476d1ce4e5b9ull;
    return mix(mix(z) + counter * 0x94d049bb133111ebull);
  }

  // Uniform in [0, 1).
  double uniform(uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes counters (2c, 2c+1).
  double normal(uint64_t counter) const {
    double u1 = uniform(2 * counter);
    double u2 = uniform(2 * counter + 1);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  uint64_t seed_;
  uint64_t stream_;
};

}  // namespace kb
