#include "cmusvm/svm.hpp"

#include <cmath>
#include <stdexcept>

#include "cmusvm/detail/compensated.hpp"
#include "cmusvm/error.hpp"

namespace cmusvm {

namespace {

double squared_distance(const Matrix& a, Index i, const Matrix& b, Index j) {
  double s = 0.0;
  for (Index k = 0; k < a.cols(); ++k) {
    const double d = a(i, k) - b(j, k);
    s += d * d;
  }
  return s;
}

}  // namespace

Index Dataset::count(double label) const {
  return static_cast<Index>((labels.array() == label).count());
}

void Dataset::validate() const {
  if (labels.size() != points.rows()) {
    throw DimensionMismatch("dataset: " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(points.rows()) + " points");
  }
  if (!points.allFinite()) throw IllPosedProblem("dataset: non-finite coordinate");
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 1.0 && labels(i) != -1.0) {
      throw IllPosedProblem("dataset: label at row " + std::to_string(i) + " is not +-1");
    }
  }
}

Matrix gaussian_kernel(const Matrix& points, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gaussian_kernel: gamma must be positive");
  const Index n = points.rows();
  Matrix K(n, n);
  for (Index j = 0; j < n; ++j) {
    K(j, j) = 1.0;
    for (Index i = j + 1; i < n; ++i) {
      const double v = std::exp(-gamma * squared_distance(points, i, points, j));
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

QpProblem assemble_problem(const Matrix& K, const Vector& labels, double upper_bound) {
  if (K.rows() != K.cols() || K.rows() != labels.size()) {
    throw DimensionMismatch("assemble_problem: kernel and labels disagree in size");
  }
  Matrix H = labels.asDiagonal() * K * labels.asDiagonal();
  return QpProblem(std::move(H), Vector::Ones(labels.size()), labels, upper_bound);
}

BiasEstimate recover_bias(const Matrix& K, const Vector& labels, const Vector& alpha,
                          double upper_bound, double mu, double eps) {
  if (!((alpha.array() > eps).any())) {
    throw IllPosedProblem("recover_bias: no support vectors");
  }
  BiasEstimate b;
  b.bias = -mu;
  detail::CompensatedSum total;
  for (Index i = 0; i < alpha.size(); ++i) {
    if (bound_sign(alpha(i), upper_bound, eps) != 0) continue;
    detail::CompensatedSum fi(labels(i));
    for (Index j = 0; j < alpha.size(); ++j) {
      if (alpha(j) != 0.0) fi.add_product(-alpha(j) * labels(j), K(j, i));
    }
    total.add(fi.value());
    ++b.free_count;
  }
  if (b.free_count > 0) {
    b.free_mean = total.value() / static_cast<double>(b.free_count);
    b.discrepancy = std::abs(b.bias - *b.free_mean);
  }
  return b;
}

std::vector<Index> SvmModel::support() const {
  std::vector<Index> s;
  for (Index i = 0; i < alpha.size(); ++i) {
    if (alpha(i) > 0.0) s.push_back(i);
  }
  return s;
}

SvmModel make_model(Dataset train, double gamma, double upper_bound, Vector alpha, double mu) {
  if (alpha.size() != train.size()) throw DimensionMismatch("make_model: alpha length != n");
  SvmModel m;
  m.train = std::move(train);
  m.gamma = gamma;
  m.upper_bound = upper_bound;
  m.alpha = std::move(alpha);
  m.mu = mu;
  m.bias = -mu;
  return m;
}

double decision_function(const SvmModel& m, const Vector& t) {
  if (t.size() != m.train.dim()) throw DimensionMismatch("decision_function: point dimension");
  const Matrix row = t.transpose();
  detail::CompensatedSum f(m.bias);
  for (Index i = 0; i < m.alpha.size(); ++i) {
    if (m.alpha(i) == 0.0) continue;
    const double k = std::exp(-m.gamma * squared_distance(m.train.points, i, row, 0));
    f.add_product(m.alpha(i) * m.train.labels(i), k);
  }
  return f.value();
}

Vector decision_function(const SvmModel& m, const Matrix& points) {
  if (points.cols() != m.train.dim()) throw DimensionMismatch("decision_function: point dimension");
  const std::vector<Index> sv = m.support();
  Vector coef(static_cast<Index>(sv.size()));
  for (std::size_t a = 0; a < sv.size(); ++a) {
    coef(static_cast<Index>(a)) = m.alpha(sv[a]) * m.train.labels(sv[a]);
  }
  Vector out(points.rows());
  for (Index r = 0; r < points.rows(); ++r) {
    detail::CompensatedSum f(m.bias);
    for (std::size_t a = 0; a < sv.size(); ++a) {
      const double k = std::exp(-m.gamma * squared_distance(m.train.points, sv[a], points, r));
      f.add_product(coef(static_cast<Index>(a)), k);
    }
    out(r) = f.value();
  }
  return out;
}

double predict(const SvmModel& m, const Vector& t) {
  return decision_function(m, t) >= 0.0 ? 1.0 : -1.0;
}

ClassErrors classification_errors(const SvmModel& m, const Dataset& test) {
  const Index pos = test.count(1.0);
  const Index neg = test.count(-1.0);
  if (pos == 0 || neg == 0) {
    throw std::invalid_argument("classification_errors: test set must contain both classes");
  }
  const Vector f = decision_function(m, test.points);
  Index wrong_pos = 0, wrong_neg = 0;
  for (Index r = 0; r < test.size(); ++r) {
    const double label = f(r) >= 0.0 ? 1.0 : -1.0;
    if (test.labels(r) > 0 && label < 0) ++wrong_pos;
    if (test.labels(r) < 0 && label > 0) ++wrong_neg;
  }
  return {static_cast<double>(wrong_pos) / static_cast<double>(pos),
          static_cast<double>(wrong_neg) / static_cast<double>(neg)};
}

}  // namespace cmusvm
