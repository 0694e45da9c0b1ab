#pragma once

#include <cmath>
#include <cstdint>

#include "tht/common.hpp"

namespace tht {

// Counter-based deterministic generator. Each draw hashes (seed, counter)
// through the SplitMix64 finalizer, so streams are reproducible across
// platforms and standard libraries, can be split without sharing state, and
// identical (config, seed) inputs give byte-identical outputs. This is why
// std::mt19937 + std::normal_distribution (implementation-defined) is not
// used anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(seed ^ mix(stream ^ 0x9e3779b97f4a7c15ull))) {}

  // Derive an independent child stream; used to give each trial of a sweep
  // its own generator so trial-level parallelism keeps determinism.
  Rng split(std::uint64_t stream) const { return Rng(state_, stream + 1); }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, m).
  std::uint64_t below(std::uint64_t m) { return next_u64() % m; }

  // Standard normal via Box-Muller (explicit so results are portable).
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0x1.0p-60) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  cd gaussian_complex() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0x1.0p-60) u1 = uniform();
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace tht
