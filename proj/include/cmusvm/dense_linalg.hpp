#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "cmusvm/qp_model.hpp"

namespace cmusvm {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Lower-triangular Cholesky factor L of a symmetric positive definite matrix,
/// with a map from factor rows back to indices of the matrix it was cut from.
///
/// A factor built from a principal submatrix M(S,S) + reg*I keeps S in
/// index_map(), so deleting local row k keeps the map in sync and the factor
/// continues to describe the submatrix on the remaining indices.
class CholFactor {
 public:
  CholFactor() = default;

  const RowMatrix& lower() const { return L_; }
  Index dim() const { return L_.rows(); }
  const std::vector<Index>& index_map() const { return index_map_; }
  double regularization() const { return reg_; }

  /// L * L^T.
  Matrix reconstruct() const;

 private:
  friend CholFactor cholesky(const Matrix&, std::vector<Index>, double);
  friend CholFactor rank_one_update(CholFactor, Vector);
  friend CholFactor delete_index(CholFactor, Index);

  RowMatrix L_;
  std::vector<Index> index_map_;
  double reg_ = 0.0;
};

/// Factors M(S,S) + reg*I where S = index (all of M when empty). Throws
/// NotPositiveDefinite carrying the local pivot that failed.
CholFactor cholesky(const Matrix& M, std::vector<Index> index = {}, double reg = 0.0);

/// Factor of L L^T + w w^T, in O(m^2).
CholFactor rank_one_update(CholFactor F, Vector w);

/// Drops local row/column k (0-based). The leading block and the rows below
/// are kept; only the trailing block receives a rank-one update with the
/// deleted column, so the cost is O((m-k)^2).
CholFactor delete_index(CholFactor F, Index k);

/// X with (L L^T) X = B.
Matrix solve_spd(const CholFactor& F, const Matrix& B);

struct RefinedSolution {
  Matrix x;
  double residual_norm = 0.0;  // ||B - M(S,S) X||_F after the last correction
};

/// Solves with the (possibly regularized) factor, then applies refine_steps
/// corrections whose residuals use the unregularized M(S,S), S being the
/// factor's index map into M. Residuals are formed in compensated arithmetic.
RefinedSolution refine_solution(const CholFactor& F, const Matrix& M, const Matrix& B,
                                int refine_steps);

/// 1e-12 * trace(M(S,S)) / |S|.
double default_regularization(const Matrix& M, const std::vector<Index>& index = {});

/// Factors M + reg*I (reg defaults to default_regularization(M)) and solves
/// with refine_steps steps of iterative refinement against M.
RefinedSolution refined_solve(const Matrix& M, std::optional<double> reg, const Matrix& B,
                              int refine_steps = 2);

}  // namespace cmusvm
