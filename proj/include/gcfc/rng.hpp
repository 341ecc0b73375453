#pragma once

#include <cstdint>
#include <random>

namespace gcfc {

// Deterministic RNG facade. Every stochastic draw in the project (synthetic
// data, parameter init, dropout, shuffling) goes through this class. The
// std:: distributions are implementation-defined, so we derive everything
// from the raw mt19937_64 stream ourselves to keep runs bit-reproducible
// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller. No spare caching: one value per call
  // keeps the stream position a simple function of the call count.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // [0, n)
  int uniform_int(int n);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace gcfc
