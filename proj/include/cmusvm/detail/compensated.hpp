#pragma once

#include <cmath>

#include <Eigen/Core>

namespace cmusvm::detail {

// Double-double accumulator built from error-free transformations (TwoSum and
// an fma-based TwoProduct). Sums of products come out as if computed in twice
// the working precision, which matters once iterates reach 1e10 while the
// gradient stays O(1).
struct CompensatedSum {
  double hi = 0.0;
  double lo = 0.0;

  CompensatedSum() = default;
  explicit CompensatedSum(double v) : hi(v) {}

  void add(double v) {
    const double s = hi + v;
    const double bv = s - hi;
    lo += (hi - (s - bv)) + (v - bv);
    hi = s;
  }

  void add_product(double a, double b) {
    const double p = a * b;
    add(p);
    lo += std::fma(a, b, -p);
  }

  double value() const { return hi + lo; }
};

// hi[i] + lo[i] += col[i] * d for i < n, the same error-free steps as
// CompensatedSum::add_product but laid out so the loop vectorizes.
inline void accumulate_column(const double* col, double d, double* hi, double* lo,
                              Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = col[i] * d;
    const double e = std::fma(col[i], d, -p);
    const double s = hi[i] + p;
    const double bv = s - hi[i];
    lo[i] += ((hi[i] - (s - bv)) + (p - bv)) + e;
    hi[i] = s;
  }
}

template <class A, class B>
double accurate_dot(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc.add_product(a(i), b(i));
  return acc.value();
}

}  // namespace cmusvm::detail
