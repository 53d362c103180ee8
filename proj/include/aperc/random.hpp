#pragma once

// Seeded sampling helpers. Only the raw std::mt19937_64 stream is used, whose
// output sequence is fixed by the standard, so results do not depend on the
// standard library's distribution implementations.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace aperc {

/// SplitMix64 finalizer; derives independent stream seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(mix_seed(seed) ^ mix_seed(~stream))) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t range = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
  }

  double exponential() { return -std::log1p(-uniform()); }

  /// Draws an index from an (approximately) normalized probability vector.
  std::size_t categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      acc += probs[i];
      last_positive = i;
      if (u < acc) return i;
    }
    return last_positive;
  }

  /// Flat Dirichlet draw: uniform on the probability simplex of dimension n.
  std::vector<double> dirichlet_flat(std::size_t n) {
    std::vector<double> x(n);
    double z = 0.0;
    for (double& v : x) {
      v = exponential();
      z += v;
    }
    for (double& v : x) v /= z;
    return x;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aperc
