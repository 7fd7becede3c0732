#pragma once

#include <cstdint>

#include "cmusvm/rng.hpp"
#include "cmusvm/svm.hpp"

namespace cmusvm {

/// Half-moon family. S1 = {x : ||x|| <= 1, ||x + delta e1|| >= 1}; negative
/// points are S1 samples shifted by +-delta e1.
struct HalfmoonSpec {
  int d = 2;
  double delta = 0.25;
  Index n = 500;  // must be a positive multiple of 4
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on d < 2, delta outside (0,2) or a bad n.
  void validate() const;
};

/// One point of S1: x1 uniform on [-delta/2, 1], the remaining coordinates a
/// uniformly random direction scaled to a uniform radius between the two
/// sphere boundaries.
Vector sample_s1_point(int d, double delta, Rng& rng);

/// Reusable source of test points with the training distribution.
class Sampler {
 public:
  enum class Kind { halfmoon, checkerboard };

  static Sampler halfmoon(int d, double delta, std::uint64_t seed);
  static Sampler checkerboard(std::uint64_t seed);

  /// Halfmoon: n - 2 floor(n/4) points labelled +1 in S1, then floor(n/4)
  /// shifted by +delta e1 and floor(n/4) by -delta e1, labelled -1.
  /// Checkerboard: n uniform points on [0,3]^2.
  Dataset sample(Index n);

  Kind kind() const { return kind_; }

 private:
  Sampler(Kind kind, int d, double delta, std::uint64_t seed)
      : kind_(kind), d_(d), delta_(delta), rng_(seed) {}

  Kind kind_;
  int d_;
  double delta_;
  Rng rng_;
};

struct GeneratedData {
  Dataset train;
  Sampler test;
};

/// Seed for the test sampler, derived from the training seed so the two
/// streams never coincide.
std::uint64_t test_stream_seed(std::uint64_t seed);

GeneratedData gen_halfmoon(const HalfmoonSpec& spec);

/// Label +1 iff floor(x1) + floor(x2) is even, with coordinate 3 counted in
/// cell 2.
double checkerboard_label(double x1, double x2);

/// Throws std::invalid_argument for n < 2 or a sample lacking one class.
GeneratedData gen_checkerboard(Index n, std::uint64_t seed);

}  // namespace cmusvm
