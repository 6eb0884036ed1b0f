#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "tubecantor/geometry.hpp"

namespace tubecantor {

/// SplitMix64 finaliser, used to derive independent stream seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// mt19937_64 with hand-rolled variates: the standard distributions are implementation
/// defined, and run outputs must be byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0 (Lemire rejection).
  std::uint64_t below(std::uint64_t n) {
    while (true) {
      const std::uint64_t x = engine_();
      const unsigned __int128 product = static_cast<unsigned __int128>(x) * n;
      const auto low = static_cast<std::uint64_t>(product);
      if (low >= n || low >= (-n) % n) return static_cast<std::uint64_t>(product >> 64);
    }
  }

  /// Standard normal via Box–Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Uniform direction on the unit sphere S^{d-1}.
  Point unit_vector(int dim) {
    Point v(static_cast<std::size_t>(dim));
    double len = 0.0;
    while (len < 1e-12) {
      for (double& x : v) x = normal();
      len = norm(v);
    }
    for (double& x : v) x /= len;
    return v;
  }

  Point point_in(const Cube& c) {
    Point p(c.center.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = c.center[i] + (uniform() - 0.5) * c.side;
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tubecantor
