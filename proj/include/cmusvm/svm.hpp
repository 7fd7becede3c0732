#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmusvm/qp_model.hpp"

namespace cmusvm {

/// Points are rows of an n x d matrix; labels are +-1.
struct Dataset {
  Matrix points;
  Vector labels;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
  Index count(double label) const;

  /// Throws IllPosedProblem on non-finite coordinates, labels other than
  /// +-1, or a label vector of the wrong length.
  void validate() const;
};

/// K_ij = exp(-gamma ||x_i - x_j||^2), evaluated once per unordered pair.
Matrix gaussian_kernel(const Matrix& points, double gamma);

/// H = ZKZ with Z = diag(labels), c = e.
QpProblem assemble_problem(const Matrix& K, const Vector& labels, double upper_bound);

struct BiasEstimate {
  double bias = 0.0;                // -mu
  std::optional<double> free_mean;  // mean of z_i - sum_j alpha_j z_j K_ji over free SVs
  double discrepancy = 0.0;         // |bias - free_mean|, 0 without free SVs
  Index free_count = 0;
};

/// Throws IllPosedProblem when alpha has no entry above eps.
BiasEstimate recover_bias(const Matrix& K, const Vector& labels, const Vector& alpha,
                          double upper_bound, double mu, double eps);

struct SvmModel {
  Dataset train;
  double gamma = 1.0;
  double upper_bound = kInfinity;
  Vector alpha;
  double bias = 0.0;
  double mu = 0.0;

  /// Indices with alpha_i > 0; only these contribute to the decision function.
  std::vector<Index> support() const;
};

/// Assembles a model from a dual solution. bias is -mu.
SvmModel make_model(Dataset train, double gamma, double upper_bound, Vector alpha, double mu);

double decision_function(const SvmModel& m, const Vector& t);

/// Same, for every row of points.
Vector decision_function(const SvmModel& m, const Matrix& points);

/// sign(f), with sign(0) = +1.
double predict(const SvmModel& m, const Vector& t);

struct ClassErrors {
  double err_pos = 0.0;  // fraction of +1 points predicted -1
  double err_neg = 0.0;  // fraction of -1 points predicted +1
};

/// Throws std::invalid_argument if a class is missing from the test set.
ClassErrors classification_errors(const SvmModel& m, const Dataset& test);

/// CSV with d coordinate columns followed by the label. A first line that
/// does not parse as numbers is taken as a header.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& ds, bool header = true);

}  // namespace cmusvm
