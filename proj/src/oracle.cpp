#include "cmusvm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace cmusvm::oracle {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

VectorXd clip(const VectorXd& y, double C) { return y.cwiseMax(0.0).cwiseMin(C); }

}  // namespace

double objective(const MatrixXd& H, const VectorXd& c, const VectorXd& x) {
  return 0.5 * x.dot(H * x) - c.dot(x);
}

VectorXd project_feasible(const VectorXd& y, const VectorXd& z, double C) {
  // x(t) = clip(y - t z) makes z'x(t) nonincreasing in t; find its root.
  auto h = [&](double t) { return z.dot(clip(y - t * z, C)); };
  double lo = -1.0, hi = 1.0;
  while (h(lo) < 0.0) lo *= 2.0;
  while (h(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  // Solve the piecewise-linear equation exactly on the final segment.
  double num = 0.0;
  Index free = 0;
  for (Index i = 0; i < y.size(); ++i) {
    const double v = y(i) - t * z(i);
    if (v > 0.0 && v < C) {
      num += z(i) * y(i);
      ++free;
    } else if (v >= C) {
      num -= z(i) * C;
    }
  }
  // z_i^2 = 1 for free i, so sum_free z_i (y_i - t z_i) = -sum_upper z_i C.
  if (free > 0) {
    const double exact = num / static_cast<double>(free);
    if (exact >= lo && exact <= hi) t = exact;
  }
  return clip(y - t * z, C);
}

double fixed_point_residual(const MatrixXd& H, const VectorXd& c, const VectorXd& z, double C,
                            const VectorXd& x) {
  const VectorXd g = H * x - c;
  return (x - project_feasible(x - g, z, C)).lpNorm<Eigen::Infinity>();
}

OracleResult enumerate_patterns(const MatrixXd& H, const VectorXd& c, const VectorXd& z,
                                double C) {
  const Index n = H.rows();
  const int base = C < kInf ? 3 : 2;  // 0 lower, 1 free, 2 upper
  std::vector<int> pattern(static_cast<std::size_t>(n), 0);
  OracleResult best;
  best.method = "enumeration";
  best.objective = kInf;

  for (;;) {
    ++best.iterations;
    std::vector<Index> F;
    VectorXd x = VectorXd::Zero(n);
    for (Index i = 0; i < n; ++i) {
      if (pattern[i] == 1) F.push_back(i);
      else if (pattern[i] == 2) x(i) = C;
    }
    const Index m = static_cast<Index>(F.size());
    bool feasible = true;
    if (m == 0) {
      feasible = std::abs(z.dot(x)) <= 1e-12 * std::max(1.0, x.lpNorm<1>());
    } else {
      // [H_FF -z_F; z_F' 0] [x_F; mu] = [c_F - H_F,U x_U; -z_U' x_U]
      MatrixXd A = MatrixXd::Zero(m + 1, m + 1);
      VectorXd b(m + 1);
      const VectorXd Hx = H * x;
      for (Index a = 0; a < m; ++a) {
        for (Index bb = 0; bb < m; ++bb) A(a, bb) = H(F[a], F[bb]);
        A(a, m) = -z(F[a]);
        A(m, a) = z(F[a]);
        b(a) = c(F[a]) - Hx(F[a]);
      }
      b(m) = -z.dot(x);
      const VectorXd sol = A.partialPivLu().solve(b);
      const double tol = 1e-10 * std::max(1.0, sol.head(m).lpNorm<Eigen::Infinity>());
      for (Index a = 0; a < m && feasible; ++a) {
        const double v = sol(a);
        if (v < -tol || v > C + tol) feasible = false;
        x(F[a]) = std::clamp(v, 0.0, C);
      }
    }
    if (feasible) {
      const double q = objective(H, c, x);
      if (q < best.objective) {
        best.objective = q;
        best.x = x;
      }
    }

    Index k = 0;
    while (k < n && ++pattern[k] == base) pattern[k++] = 0;
    if (k == n) break;
  }
  if (best.x.size() == 0) throw std::runtime_error("oracle: no feasible pattern");
  best.residual = fixed_point_residual(H, c, z, C, best.x);
  return best;
}

OracleResult projected_gradient(const MatrixXd& H, const VectorXd& c, const VectorXd& z,
                                double C, double tol, long max_iters) {
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(H, Eigen::EigenvaluesOnly);
  const double L = eig.eigenvalues().maxCoeff();
  const double mu = eig.eigenvalues().minCoeff();
  if (!(mu > 0.0)) throw std::invalid_argument("oracle: H must be positive definite");

  OracleResult r;
  r.method = "projected_gradient";
  VectorXd x = project_feasible(VectorXd::Zero(H.rows()), z, C);
  VectorXd y = x;
  // Accelerated variant for strongly convex problems, with adaptive restart.
  const double beta = (std::sqrt(L) - std::sqrt(mu)) / (std::sqrt(L) + std::sqrt(mu));
  for (r.iterations = 0; r.iterations < max_iters; ++r.iterations) {
    const VectorXd next = project_feasible(y - (H * y - c) / L, z, C);
    // Gradient restart test: comparing objective values instead would stall
    // once their differences drop below rounding, near ||x - x*|| ~ 1e-8.
    if ((y - next).dot(next - x) > 0.0) {
      y = next;
    } else {
      y = next + beta * (next - x);
    }
    x = next;
    if (r.iterations % 16 == 0) {
      r.residual = fixed_point_residual(H, c, z, C, x);
      if (r.residual <= tol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) break;
    }
  }
  r.residual = fixed_point_residual(H, c, z, C, x);
  r.objective = objective(H, c, x);
  r.x = std::move(x);
  return r;
}

OracleResult solve(const MatrixXd& H, const VectorXd& c, const VectorXd& z, double C,
                   double max_patterns) {
  const double patterns = std::pow(C < kInf ? 3.0 : 2.0, static_cast<double>(H.rows()));
  if (patterns <= max_patterns) return enumerate_patterns(H, c, z, C);
  return projected_gradient(H, c, z, C);
}

}  // namespace cmusvm::oracle
