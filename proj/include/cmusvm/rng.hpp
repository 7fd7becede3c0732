#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cmusvm {

/// Seedable 64-bit generator (std::mt19937_64) with fixed transforms, so a
/// seed reproduces the same stream on every standard library:
///   uniform(): top 53 bits scaled into [0, 1)
///   normal():  Box-Muller, second variate cached
///   index(n):  rejection sampling, unbiased
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t u = engine_();
    while (u >= limit) u = engine_();
    return u % n;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cmusvm
