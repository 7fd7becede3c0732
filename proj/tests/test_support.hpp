#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "cmusvm/qp_model.hpp"

namespace testing {

using cmusvm::Index;
using cmusvm::Matrix;
using cmusvm::Vector;

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& eng) {
  std::normal_distribution<double> normal;
  Matrix M(rows, cols);
  for (Index i = 0; i < M.size(); ++i) M.data()[i] = normal(eng);
  return M;
}

/// M'M + I.
inline Matrix random_spd(Index m, std::mt19937_64& eng) {
  const Matrix M = random_matrix(m, m, eng);
  return M.transpose() * M + Matrix::Identity(m, m);
}

/// Random +-1 labels with both classes present.
inline Vector random_labels(Index n, std::mt19937_64& eng) {
  Vector z(n);
  for (Index i = 0; i < n; ++i) z(i) = (eng() & 1) ? 1.0 : -1.0;
  const Index a = static_cast<Index>(eng() % static_cast<std::uint64_t>(n));
  Index b = static_cast<Index>(eng() % static_cast<std::uint64_t>(n - 1));
  if (b >= a) ++b;
  z(a) = 1.0;
  z(b) = -1.0;
  return z;
}

struct Instance {
  Matrix H;
  Vector c;
  Vector z;
  double C;
  cmusvm::QpProblem problem() const { return cmusvm::QpProblem(H, c, z, C); }
};

inline Instance random_instance(Index n, double C, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  Instance in{random_spd(n, eng), Vector::Ones(n), Vector(), C};
  in.z = random_labels(n, eng);
  return in;
}

/// q(x) in long double, as a reference for the compensated evaluation.
inline long double objective_ld(const Matrix& H, const Vector& c, const Vector& x) {
  long double quad = 0.0L, lin = 0.0L;
  for (Index i = 0; i < x.size(); ++i) {
    long double row = 0.0L;
    for (Index j = 0; j < x.size(); ++j) row += static_cast<long double>(H(i, j)) * x(j);
    quad += row * x(i);
    lin += static_cast<long double>(c(i)) * x(i);
  }
  return 0.5L * quad - lin;
}

/// A random point of [0,C]^n with z'x = 0 and a mix of bound and free entries.
inline Vector random_feasible(const Vector& z, double C, std::mt19937_64& eng) {
  const Index n = z.size();
  const double top = C < cmusvm::kInfinity ? C : 5.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(n);
  for (Index i = 0; i < n; ++i) {
    const double r = u(eng);
    x(i) = r < 0.25 ? 0.0 : (r < 0.4 && C < cmusvm::kInfinity ? C : top * u(eng));
  }
  // Scale the heavier class down so that z'x = 0 while staying in the box.
  double pos = 0.0, neg = 0.0;
  for (Index i = 0; i < n; ++i) (z(i) > 0 ? pos : neg) += x(i);
  if (pos == 0.0 || neg == 0.0) return Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (z(i) > 0 && pos > neg) x(i) *= neg / pos;
    if (z(i) < 0 && neg > pos) x(i) *= pos / neg;
  }
  return x;
}

}  // namespace testing
