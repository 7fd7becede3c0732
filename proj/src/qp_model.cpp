#include "cmusvm/qp_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmusvm/detail/compensated.hpp"
#include "cmusvm/error.hpp"

namespace cmusvm {

namespace {

void require_size(Index got, Index want, const char* what) {
  if (got != want) {
    throw DimensionMismatch(std::string(what) + ": expected length " +
                            std::to_string(want) + ", got " + std::to_string(got));
  }
}

std::vector<Index> support_of(const Vector& x) {
  std::vector<Index> idx;
  for (Index j = 0; j < x.size(); ++j) {
    if (x(j) != 0.0) idx.push_back(j);
  }
  return idx;
}

}  // namespace

QpProblem::QpProblem(Matrix hessian, Vector linear, Vector labels, double upper_bound)
    : hessian_(std::move(hessian)),
      linear_(std::move(linear)),
      labels_(std::move(labels)),
      upper_bound_(upper_bound) {
  const Index n = labels_.size();
  if (n < 2) throw IllPosedProblem("QpProblem: need at least two variables");
  if (hessian_.rows() != n || hessian_.cols() != n) {
    throw DimensionMismatch("QpProblem: Hessian must be " + std::to_string(n) + "x" +
                            std::to_string(n));
  }
  require_size(linear_.size(), n, "QpProblem linear term");
  if (!(upper_bound_ > 0.0)) throw IllPosedProblem("QpProblem: C must be positive");

  Index positives = 0;
  for (Index i = 0; i < n; ++i) {
    const double zi = labels_(i);
    if (zi != 1.0 && zi != -1.0) throw IllPosedProblem("QpProblem: labels must be +-1");
    if (zi > 0) ++positives;
  }
  if (positives == 0 || positives == n) {
    throw IllPosedProblem("QpProblem: labels must contain both classes");
  }

  const double scale = std::max(1.0, hessian_.cwiseAbs().maxCoeff());
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      if (std::abs(hessian_(i, j) - hessian_(j, i)) > 1e-12 * scale) {
        throw IllPosedProblem("QpProblem: Hessian is not symmetric");
      }
    }
  }
  diagonal_ = hessian_.diagonal();
  if (!(diagonal_.minCoeff() > 0.0)) {
    throw IllPosedProblem("QpProblem: Hessian diagonal must be positive");
  }
  kernel_normalized_ = (diagonal_.array() == 1.0).all();
}

double default_eps_active(double upper_bound) {
  const double c_finite = upper_bound < kInfinity ? upper_bound : 1.0;
  return 1e-9 * std::max(1.0, c_finite);
}

double objective(const QpProblem& p, const Vector& x) {
  require_size(x.size(), p.size(), "objective");
  const Matrix& H = p.hessian();
  const Vector& c = p.linear();
  const std::vector<Index> supp = support_of(x);

  detail::CompensatedSum q;
  for (Index i : supp) {
    detail::CompensatedSum row;
    const double* col = H.col(i).data();
    for (Index j : supp) row.add_product(col[j], x(j));
    q.add_product(x(i), 0.5 * row.hi);
    q.add_product(x(i), 0.5 * row.lo);
    q.add_product(x(i), -c(i));
  }
  return q.value();
}

Vector gradient(const QpProblem& p, const Vector& x) {
  require_size(x.size(), p.size(), "gradient");
  const Matrix& H = p.hessian();
  const std::vector<Index> supp = support_of(x);
  Vector g(p.size());
  for (Index i = 0; i < p.size(); ++i) {
    detail::CompensatedSum acc(-p.linear()(i));
    const double* col = H.col(i).data();
    for (Index j : supp) acc.add_product(col[j], x(j));
    g(i) = acc.value();
  }
  return g;
}

Vector project_nullspace(const Vector& z, const Vector& y) {
  require_size(y.size(), z.size(), "project_nullspace");
  const double n = static_cast<double>(z.size());
  const double t = detail::accurate_dot(z, y) / n;
  return y - t * z;
}

Vector project_tangent_cone(const Vector& x, const Vector& y, double upper_bound,
                            double eps) {
  require_size(y.size(), x.size(), "project_tangent_cone");
  Vector p = y;
  for (Index i = 0; i < x.size(); ++i) {
    switch (bound_sign(x(i), upper_bound, eps)) {
      case 1: p(i) = std::max(0.0, y(i)); break;
      case -1: p(i) = std::min(0.0, y(i)); break;
      default: break;
    }
  }
  return p;
}

ActivePartition active_partition(const Vector& x, double upper_bound, double eps) {
  ActivePartition part;
  part.eps = eps;
  part.sigma = Vector::Zero(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const int s = bound_sign(x(i), upper_bound, eps);
    part.sigma(i) = s;
    (s == 0 ? part.inactive : part.active).push_back(i);
  }
  return part;
}

double multiplier_mu(const Vector& g, const Vector& z, const ActivePartition& part) {
  require_size(g.size(), z.size(), "multiplier_mu");
  if (!part.inactive.empty()) {
    detail::CompensatedSum acc;
    for (Index k : part.inactive) acc.add_product(g(k), z(k));
    return acc.value() / static_cast<double>(part.inactive.size());
  }
  double mu = kInfinity;
  for (Index i = 0; i < g.size(); ++i) {
    if (part.sigma(i) * z(i) == 1.0) mu = std::min(mu, part.sigma(i) * g(i));
  }
  if (mu == kInfinity) {
    throw InfeasibleIterate("multiplier_mu: no index with sigma_i z_i = 1; iterate is infeasible");
  }
  return mu;
}

KktReport kkt_report(const QpProblem& p, const Vector& x, double eps) {
  return kkt_report(p, x, gradient(p, x), eps);
}

KktReport kkt_report(const QpProblem& p, const Vector& x, const Vector& g, double eps) {
  require_size(x.size(), p.size(), "kkt_report");
  require_size(g.size(), p.size(), "kkt_report gradient");
  const Vector& z = p.labels();
  const ActivePartition part = active_partition(x, p.upper_bound(), eps);

  KktReport r;
  r.mu = multiplier_mu(g, z, part);
  const Vector gt = g - r.mu * z;

  double sq = 0.0;
  for (Index k : part.inactive) sq += gt(k) * gt(k);
  r.grad_norm_K = std::sqrt(sq);

  double min_signed = 0.0;
  for (Index i : part.active) min_signed = std::min(min_signed, part.sigma(i) * gt(i));
  r.sign_violation = -min_signed;

  r.x_inf_norm = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  r.rel_residual = std::max(r.grad_norm_K, r.sign_violation) / std::max(1.0, r.x_inf_norm);
  return r;
}

}  // namespace cmusvm
