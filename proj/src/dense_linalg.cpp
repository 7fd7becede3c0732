#include "cmusvm/dense_linalg.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Core>

#include "cmusvm/detail/compensated.hpp"
#include "cmusvm/error.hpp"

namespace cmusvm {

namespace {

std::vector<Index> identity_map(Index m) {
  std::vector<Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

// Givens-style positive update of the trailing block L(o:, o:) by w(o:).
void update_trailing(RowMatrix& L, Vector& w, Index offset) {
  const Index m = L.rows();
  for (Index k = offset; k < m; ++k) {
    const double wk = w(k);
    if (wk == 0.0) continue;
    const double lkk = L(k, k);
    const double r = std::sqrt(lkk * lkk + wk * wk);
    const double c = r / lkk;
    const double s = wk / lkk;
    L(k, k) = r;
    for (Index i = k + 1; i < m; ++i) {
      const double lik = (L(i, k) + s * w(i)) / c;
      w(i) = c * w(i) - s * lik;
      L(i, k) = lik;
    }
  }
}

}  // namespace

Matrix CholFactor::reconstruct() const {
  const auto Lt = L_.triangularView<Eigen::Lower>();
  Matrix dense = Lt.toDenseMatrix();
  return dense * dense.transpose();
}

CholFactor cholesky(const Matrix& M, std::vector<Index> index, double reg) {
  if (M.rows() != M.cols()) throw DimensionMismatch("cholesky: matrix must be square");
  if (index.empty()) index = identity_map(M.rows());
  const Index m = static_cast<Index>(index.size());

  CholFactor F;
  F.index_map_ = std::move(index);
  F.reg_ = reg;
  F.L_ = RowMatrix::Zero(m, m);
  RowMatrix& L = F.L_;
  const auto& S = F.index_map_;

  // Row-by-row (Cholesky-Banachiewicz): both operands of each dot product are
  // contiguous rows of the row-major factor.
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j <= i; ++j) {
      double s = M(S[i], S[j]);
      if (j > 0) s -= L.row(i).head(j).dot(L.row(j).head(j));
      if (i == j) {
        s += reg;
        if (!(s > 0.0)) throw NotPositiveDefinite(i, s);
        L(i, i) = std::sqrt(s);
      } else {
        L(i, j) = s / L(j, j);
      }
    }
  }
  return F;
}

CholFactor rank_one_update(CholFactor F, Vector w) {
  if (w.size() != F.dim()) throw DimensionMismatch("rank_one_update: vector length != dim");
  update_trailing(F.L_, w, 0);
  return F;
}

CholFactor delete_index(CholFactor F, Index k) {
  const Index m = F.dim();
  if (k < 0 || k >= m) {
    throw std::out_of_range("delete_index: local index " + std::to_string(k) +
                            " outside [0, " + std::to_string(m) + ")");
  }
  const Index tail = m - 1 - k;
  Vector l32 = Vector::Zero(m - 1);
  l32.tail(tail) = F.L_.col(k).tail(tail);

  RowMatrix R(m - 1, m - 1);
  R.topLeftCorner(k, k) = F.L_.topLeftCorner(k, k);
  R.topRightCorner(k, tail).setZero();
  R.bottomLeftCorner(tail, k) = F.L_.bottomLeftCorner(tail, k);
  R.bottomRightCorner(tail, tail) = F.L_.bottomRightCorner(tail, tail);

  update_trailing(R, l32, k);
  F.L_ = std::move(R);
  F.index_map_.erase(F.index_map_.begin() + k);
  return F;
}

Matrix solve_spd(const CholFactor& F, const Matrix& B) {
  if (B.rows() != F.dim()) throw DimensionMismatch("solve_spd: right-hand side rows != dim");
  const auto& L = F.lower();
  Matrix y = L.triangularView<Eigen::Lower>().solve(B);
  return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

namespace {

// B - M(S,S) X, each entry a compensated dot product.
Matrix residual(const Matrix& M, const std::vector<Index>& S, const Matrix& B,
                const Matrix& X) {
  const Index m = static_cast<Index>(S.size());
  Matrix sub(m, m);
  for (Index b = 0; b < m; ++b) {
    const double* mc = M.col(S[b]).data();
    for (Index a = 0; a < m; ++a) sub(a, b) = mc[S[a]];
  }
  Matrix R(m, B.cols());
  Vector hi(m), lo(m);
  for (Index r = 0; r < B.cols(); ++r) {
    hi = B.col(r);
    lo.setZero();
    for (Index b = 0; b < m; ++b) {
      detail::accumulate_column(sub.col(b).data(), -X(b, r), hi.data(), lo.data(), m);
    }
    R.col(r) = hi + lo;
  }
  return R;
}

}  // namespace

RefinedSolution refine_solution(const CholFactor& F, const Matrix& M, const Matrix& B,
                                int refine_steps) {
  if (refine_steps < 0) throw std::invalid_argument("refine_solution: negative refine_steps");
  RefinedSolution out;
  out.x = solve_spd(F, B);
  Matrix R = residual(M, F.index_map(), B, out.x);
  for (int step = 0; step < refine_steps; ++step) {
    out.x += solve_spd(F, R);
    R = residual(M, F.index_map(), B, out.x);
  }
  out.residual_norm = R.norm();
  return out;
}

double default_regularization(const Matrix& M, const std::vector<Index>& index) {
  if (index.empty()) {
    return M.rows() ? 1e-12 * M.trace() / static_cast<double>(M.rows()) : 0.0;
  }
  double tr = 0.0;
  for (Index i : index) tr += M(i, i);
  return 1e-12 * tr / static_cast<double>(index.size());
}

RefinedSolution refined_solve(const Matrix& M, std::optional<double> reg, const Matrix& B,
                              int refine_steps) {
  if (M.rows() != M.cols()) throw DimensionMismatch("refined_solve: matrix must be square");
  if (B.rows() != M.rows()) throw DimensionMismatch("refined_solve: right-hand side rows");
  const double r = reg.value_or(default_regularization(M));
  const CholFactor F = cholesky(M, {}, r);
  return refine_solution(F, M, B, refine_steps);
}

}  // namespace cmusvm
