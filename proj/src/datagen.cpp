#include "cmusvm/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cmusvm {

void HalfmoonSpec::validate() const {
  if (d < 2) throw std::invalid_argument("halfmoon: d must be at least 2");
  if (!(delta > 0.0 && delta < 2.0)) throw std::invalid_argument("halfmoon: delta must lie in (0,2)");
  if (n < 4 || n % 4 != 0) {
    throw std::invalid_argument("halfmoon: n must be a positive multiple of 4, got " +
                                std::to_string(n));
  }
}

Vector sample_s1_point(int d, double delta, Rng& rng) {
  Vector x(d);
  const double x1 = rng.uniform(-0.5 * delta, 1.0);
  Vector y(d - 1);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Index k = 0; k < y.size(); ++k) y(k) = rng.normal();
    norm = y.norm();
  }
  const double shifted = x1 + delta;
  const double r_min = std::sqrt(std::max(0.0, 1.0 - shifted * shifted));
  const double r_max = std::sqrt(std::max(0.0, 1.0 - x1 * x1));
  const double radius = rng.uniform(r_min, r_max);
  x(0) = x1;
  x.tail(d - 1) = (radius / norm) * y;
  return x;
}

Sampler Sampler::halfmoon(int d, double delta, std::uint64_t seed) {
  return Sampler(Kind::halfmoon, d, delta, seed);
}

Sampler Sampler::checkerboard(std::uint64_t seed) {
  return Sampler(Kind::checkerboard, 2, 0.0, seed);
}

Dataset Sampler::sample(Index n) {
  Dataset ds{Matrix(n, d_), Vector(n)};
  if (kind_ == Kind::checkerboard) {
    for (Index i = 0; i < n; ++i) {
      ds.points(i, 0) = rng_.uniform(0.0, 3.0);
      ds.points(i, 1) = rng_.uniform(0.0, 3.0);
      ds.labels(i) = checkerboard_label(ds.points(i, 0), ds.points(i, 1));
    }
    return ds;
  }
  const Index quarter = n / 4;
  const Index positive = n - 2 * quarter;
  for (Index i = 0; i < n; ++i) {
    ds.points.row(i) = sample_s1_point(d_, delta_, rng_).transpose();
    ds.labels(i) = 1.0;
    if (i >= positive) {
      ds.points(i, 0) += i < positive + quarter ? delta_ : -delta_;
      ds.labels(i) = -1.0;
    }
  }
  return ds;
}

std::uint64_t test_stream_seed(std::uint64_t seed) {
  // splitmix64 finalizer on an offset seed
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GeneratedData gen_halfmoon(const HalfmoonSpec& spec) {
  spec.validate();
  Sampler train = Sampler::halfmoon(spec.d, spec.delta, spec.seed);
  return {train.sample(spec.n), Sampler::halfmoon(spec.d, spec.delta, test_stream_seed(spec.seed))};
}

double checkerboard_label(double x1, double x2) {
  const int c1 = std::min(2, static_cast<int>(std::floor(x1)));
  const int c2 = std::min(2, static_cast<int>(std::floor(x2)));
  return (c1 + c2) % 2 == 0 ? 1.0 : -1.0;
}

GeneratedData gen_checkerboard(Index n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("checkerboard: n must be at least 2");
  Sampler train = Sampler::checkerboard(seed);
  Dataset ds = train.sample(n);
  if (ds.count(1.0) == 0 || ds.count(-1.0) == 0) {
    throw std::invalid_argument("checkerboard: sample contains a single class; pick another seed");
  }
  return {std::move(ds), Sampler::checkerboard(test_stream_seed(seed))};
}

}  // namespace cmusvm
