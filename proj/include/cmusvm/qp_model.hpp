#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

namespace cmusvm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// The box- and equality-constrained QP
///
///   min  q(x) = 1/2 x'Hx - c'x   s.t.  z'x = 0,  0 <= x <= C.
///
/// C may be kInfinity, in which case the upper-bound cases never trigger.
/// Instances are immutable once built.
class QpProblem {
 public:
  /// Validates the data and throws IllPosedProblem (or DimensionMismatch) if
  /// labels are not +-1 with both classes present, H is not symmetric with a
  /// positive diagonal, or C is not positive.
  QpProblem(Matrix hessian, Vector linear, Vector labels, double upper_bound);

  const Matrix& hessian() const { return hessian_; }
  const Vector& linear() const { return linear_; }
  const Vector& labels() const { return labels_; }
  const Vector& diagonal() const { return diagonal_; }
  double upper_bound() const { return upper_bound_; }
  bool has_upper_bound() const { return upper_bound_ < kInfinity; }
  Index size() const { return labels_.size(); }

  /// True when every H_ii is exactly 1 (Gaussian kernels).
  bool kernel_normalized() const { return kernel_normalized_; }

 private:
  Matrix hessian_;
  Vector linear_;
  Vector labels_;
  Vector diagonal_;
  double upper_bound_;
  bool kernel_normalized_ = false;
};

/// Default active-set tolerance: 1e-9 * max(1, C), with C taken as 1 when it
/// is infinite.
double default_eps_active(double upper_bound);

/// Classifies x_i: +1 at the lower bound, -1 at the upper bound, 0 free.
/// Lower wins when the two tolerance bands overlap.
inline int bound_sign(double xi, double upper_bound, double eps) {
  if (xi <= eps) return 1;
  if (upper_bound < kInfinity && xi >= upper_bound - eps) return -1;
  return 0;
}

struct ActivePartition {
  std::vector<Index> active;    // ascending
  std::vector<Index> inactive;  // ascending
  Vector sigma;                 // +1 lower-active, -1 upper-active, 0 free
  double eps = 0.0;
};

struct KktReport {
  double mu = 0.0;
  double grad_norm_K = 0.0;     // ||g~_K||_2
  double sign_violation = 0.0;  // max(0, -min_i sigma_i g~_i)
  double rel_residual = 0.0;    // max of both over max(1, ||x||_inf)
  double x_inf_norm = 0.0;
};

/// q(x), accumulated in compensated arithmetic so that cancellation between
/// the quadratic and linear parts does not swamp the result.
double objective(const QpProblem& p, const Vector& x);

/// g = Hx - c with every component computed as a compensated dot product.
Vector gradient(const QpProblem& p, const Vector& x);

/// y - (z'y / n) z.
Vector project_nullspace(const Vector& z, const Vector& y);

/// Componentwise projection of y onto the tangent cone of the box at x.
Vector project_tangent_cone(const Vector& x, const Vector& y, double upper_bound,
                            double eps);

ActivePartition active_partition(const Vector& x, double upper_bound, double eps);

/// Equality multiplier: mean of z_k g_k over the inactive set, or, when
/// everything is active, min{sigma_i g_i : sigma_i z_i = 1}. Throws
/// InfeasibleIterate if that set is empty.
double multiplier_mu(const Vector& g, const Vector& z, const ActivePartition& part);

KktReport kkt_report(const QpProblem& p, const Vector& x, double eps);

/// Same as above for a caller that already holds an accurate gradient.
KktReport kkt_report(const QpProblem& p, const Vector& x, const Vector& g,
                     double eps);

}  // namespace cmusvm
