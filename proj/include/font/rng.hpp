#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace font {

/// Counter-derived random streams. Every consumer of randomness derives its
/// own stream from (master seed, key...) so results do not depend on how work
/// is scheduled across threads. All variate transforms are implemented here
/// rather than taken from <random> so that output is byte-identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  /// Derive an independent stream keyed by (seed, keys...).
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = seed;
    for (std::uint64_t k : keys) {
      h = mix(h ^ (k + 0x9e3779b97f4a7c15ull));
    }
    return Rng(h);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer on [lo, hi], inclusive. Unbiased (rejection sampling).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next_u64());  // full span
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return lo + static_cast<std::int64_t>(x % range);
  }

  /// Standard normal via Box-Muller; consumes exactly two engine outputs.
  double normal() {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      const double u = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
      return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  /// Symmetric Dirichlet(alpha) of dimension k.
  Eigen::VectorXd dirichlet(int k, double alpha) {
    Eigen::VectorXd p(k);
    for (int i = 0; i < k; ++i) p(i) = gamma(alpha);
    const double s = p.sum();
    if (s <= 0.0) return Eigen::VectorXd::Constant(k, 1.0 / k);
    return p / s;
  }

  /// Sample an index in [0, probs.size()) proportional to probs.
  int categorical(const Eigen::Ref<const Eigen::VectorXd>& probs) {
    const double u = uniform() * probs.sum();
    double acc = 0.0;
    for (int i = 0; i < probs.size(); ++i) {
      acc += probs(i);
      if (u < acc) return i;
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {  // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace font
