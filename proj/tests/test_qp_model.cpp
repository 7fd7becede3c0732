#include <doctest.h>

#include <cmath>
#include <random>

#include "cmusvm/error.hpp"
#include "cmusvm/oracle.hpp"
#include "cmusvm/qp_model.hpp"
#include "test_support.hpp"

using namespace cmusvm;

namespace {

QpProblem toy(double C = kInfinity) {
  return QpProblem(Matrix::Identity(2, 2), Vector::Ones(2), Vector{{1.0, -1.0}}, C);
}

}  // namespace

TEST_SUITE("qp_model") {

TEST_CASE("construction validates the data") {
  const Matrix I = Matrix::Identity(2, 2);
  const Vector e = Vector::Ones(2);
  CHECK_THROWS_AS(QpProblem(I, e, Vector{{1.0, 1.0}}, 1.0), IllPosedProblem);
  CHECK_THROWS_AS(QpProblem(I, e, Vector{{1.0, 0.5}}, 1.0), IllPosedProblem);
  CHECK_THROWS_AS(QpProblem(I, e, Vector{{1.0, -1.0}}, 0.0), IllPosedProblem);
  CHECK_THROWS_AS(QpProblem(I, Vector::Ones(3), Vector{{1.0, -1.0}}, 1.0), DimensionMismatch);
  Matrix asym = I;
  asym(0, 1) = 1e-6;
  CHECK_THROWS_AS(QpProblem(asym, e, Vector{{1.0, -1.0}}, 1.0), IllPosedProblem);
  Matrix neg = I;
  neg(1, 1) = -1.0;
  CHECK_THROWS_AS(QpProblem(neg, e, Vector{{1.0, -1.0}}, 1.0), IllPosedProblem);

  const QpProblem p = toy();
  CHECK(p.size() == 2);
  CHECK_FALSE(p.has_upper_bound());
  CHECK(p.kernel_normalized());
  CHECK(toy(3.0).has_upper_bound());
}

TEST_CASE("objective hand values") {
  const Vector z{{1.0, -1.0}};
  const Vector e = Vector::Ones(2);
  CHECK(objective(toy(), Vector::Zero(2)) == 0.0);
  CHECK(objective(QpProblem(2.0 * Matrix::Identity(2, 2), e, z, kInfinity), e) == doctest::Approx(0.0));
  CHECK(objective(toy(), e) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(objective(toy(), Vector::Zero(3)), DimensionMismatch);
}

TEST_CASE("gradient hand values") {
  const Vector z{{1.0, -1.0}};
  CHECK(gradient(toy(), Vector::Zero(2)).isApprox(-Vector::Ones(2)));
  CHECK(gradient(toy(), Vector::Ones(2)).norm() == 0.0);
  const Matrix H{{2.0, 1.0}, {1.0, 2.0}};
  const QpProblem p(H, Vector::Zero(2), z, kInfinity);
  CHECK(gradient(p, Vector{{1.0, 0.0}}) == Vector{{2.0, 1.0}});
  CHECK_THROWS_AS(gradient(p, Vector::Zero(1)), DimensionMismatch);
}

TEST_CASE("objective stays accurate when x is huge and q is tiny") {
  // x = t (1, 1) with H = [[1, -1+d], [-1+d, 1]]: q = t^2 d - 2t, which loses
  // every digit to cancellation in plain double arithmetic for t = 1e10.
  const double d = 0x1p-30;
  const Matrix H{{1.0, -1.0 + d}, {-1.0 + d, 1.0}};
  const QpProblem p(H, Vector::Ones(2), Vector{{1.0, -1.0}}, kInfinity);
  const double t = 1e10;
  const Vector x{{t, t}};
  const long double exact = static_cast<long double>(t) * t * d - 2.0L * t;
  CHECK(std::abs(objective(p, x) - static_cast<double>(exact)) <=
        1e-12 * std::abs(static_cast<double>(exact)));
  const Vector g = gradient(p, x);
  CHECK(g(0) == doctest::Approx(t * d - 1.0).epsilon(1e-12));
}

TEST_CASE("objective agrees with a long double evaluation") {
  std::mt19937_64 eng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = testing::random_instance(12, 10.0, 100 + trial);
    const Vector x = testing::random_feasible(in.z, in.C, eng);
    const long double ref = testing::objective_ld(in.H, in.c, x);
    CHECK(std::abs(objective(in.problem(), x) - static_cast<double>(ref)) <=
          1e-14 * std::max(1.0, std::abs(static_cast<double>(ref))));
  }
}

TEST_CASE("project_nullspace") {
  CHECK(project_nullspace(Vector{{1.0, -1.0}}, Vector{{1.0, 1.0}}) == Vector{{1.0, 1.0}});
  CHECK(project_nullspace(Vector{{1.0, 1.0}}, Vector{{1.0, 0.0}}).isApprox(Vector{{0.5, -0.5}}));
  const Vector z{{1.0, -1.0, 1.0}};
  CHECK(project_nullspace(z, z).norm() == 0.0);

  std::mt19937_64 eng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 2 + static_cast<Index>(eng() % 40);
    const Vector zz = testing::random_labels(n, eng);
    const Vector y = testing::random_matrix(n, 1, eng) * 100.0;
    const Vector r = project_nullspace(zz, y);
    CHECK(std::abs(zz.dot(r)) <= 1e-12 * y.norm() * std::sqrt(static_cast<double>(n)));
    CHECK((project_nullspace(zz, r) - r).norm() <= 1e-12 * std::max(1.0, r.norm()));
  }
}

TEST_CASE("project_tangent_cone cases") {
  const double C = 2.0, eps = 1e-9;
  const Vector x{{0.0, 1.0, 2.0}};
  const Vector p = project_tangent_cone(x, Vector{{-1.0, -1.0, -1.0}}, C, eps);
  CHECK(p == Vector{{0.0, -1.0, -1.0}});
  const Vector q = project_tangent_cone(x, Vector{{1.0, 1.0, 1.0}}, C, eps);
  CHECK(q == Vector{{1.0, 1.0, 0.0}});
  const Vector interior{{0.5, 1.0, 1.5}};
  const Vector y{{-3.0, 4.0, 5.0}};
  CHECK(project_tangent_cone(interior, y, C, eps) == y);
  // Infinite C never clips from above.
  CHECK(project_tangent_cone(Vector{{1e12, 0.0}}, Vector{{1.0, 1.0}}, kInfinity, eps) ==
        Vector{{1.0, 1.0}});
}

TEST_CASE("active_partition") {
  const ActivePartition all = active_partition(Vector::Zero(4), 1.0, 1e-9);
  CHECK(all.active.size() == 4);
  CHECK(all.inactive.empty());
  CHECK(all.sigma == Vector::Ones(4));

  const ActivePartition mixed = active_partition(Vector{{0.0, 0.5, 1.0}}, 1.0, 1e-9);
  CHECK(mixed.active == std::vector<Index>{0, 2});
  CHECK(mixed.inactive == std::vector<Index>{1});
  CHECK(mixed.sigma == Vector{{1.0, 0.0, -1.0}});

  const ActivePartition none = active_partition(Vector{{0.3, 0.5}}, 1.0, 1e-9);
  CHECK(none.active.empty());
  CHECK(none.sigma.isZero());

  // Tolerance bands.
  CHECK(bound_sign(5e-10, 1.0, 1e-9) == 1);
  CHECK(bound_sign(1.0 - 5e-10, 1.0, 1e-9) == -1);
  CHECK(bound_sign(1e12, kInfinity, 1e-9) == 0);
  CHECK(default_eps_active(kInfinity) == 1e-9);
  CHECK(default_eps_active(10.0) == doctest::Approx(1e-8));
  CHECK(default_eps_active(0.5) == 1e-9);
}

TEST_CASE("multiplier_mu branches") {
  const Vector z{{1.0, -1.0, 1.0}};
  ActivePartition part = active_partition(Vector{{0.5, 0.5, 0.0}}, kInfinity, 1e-9);
  CHECK(multiplier_mu(Vector{{2.0, -2.0, 7.0}}, z, part) == doctest::Approx(2.0));
  CHECK(multiplier_mu(-3.0 * z, z, part) == doctest::Approx(-3.0));

  const Vector z2{{1.0, -1.0}};
  const ActivePartition empty_k = active_partition(Vector::Zero(2), kInfinity, 1e-9);
  CHECK(multiplier_mu(Vector{{-1.0, 4.0}}, z2, empty_k) == -1.0);

  // All active at the upper bound with only +1 labels on top: sigma_i z_i = -1.
  ActivePartition bad;
  bad.active = {0};
  bad.sigma = Vector{{-1.0}};
  CHECK_THROWS_AS(multiplier_mu(Vector{{1.0}}, Vector{{1.0}}, bad), InfeasibleIterate);
}

TEST_CASE("kkt_report at the toy optimum and elsewhere") {
  const KktReport at = kkt_report(toy(), Vector::Ones(2), 1e-9);
  CHECK(at.rel_residual == 0.0);
  CHECK(at.mu == 0.0);
  const KktReport off = kkt_report(toy(), Vector{{0.5, 0.5}}, 1e-9);
  CHECK(off.rel_residual > 0.0);
  CHECK(off.grad_norm_K > 0.0);
  CHECK(off.x_inf_norm == 0.5);
}

TEST_CASE("reduced gradient gives descent and the technical inequality holds") {
  std::mt19937_64 eng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 2 + static_cast<Index>(eng() % 10);
    const double C = (trial % 2) ? 3.0 : kInfinity;
    const auto in = testing::random_instance(n, C, 500 + trial);
    const Vector x = testing::random_feasible(in.z, C, eng);
    const double eps = default_eps_active(C);
    const ActivePartition part = active_partition(x, C, eps);
    const Vector g = gradient(in.problem(), x);
    const Vector gt = g - multiplier_mu(g, in.z, part) * in.z;
    const Vector s = project_tangent_cone(x, -gt, C, eps);
    if (s.norm() > 0.0) CHECK(gt.dot(s) < 0.0);

    // g's^ >= -(P(-g))'s^ for any s^ in the tangent cone.
    const Vector r = testing::random_matrix(n, 1, eng);
    const Vector sh = project_tangent_cone(x, r, C, eps);
    CHECK(g.dot(sh) >= -project_tangent_cone(x, -g, C, eps).dot(sh) - 1e-12 * (1.0 + g.norm() * sh.norm()));
  }
}

TEST_CASE("kkt residual vanishes at the oracle minimizer only") {
  std::mt19937_64 eng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 2 + static_cast<Index>(trial % 7);
    const double C = trial % 3 == 0 ? kInfinity : 2.0;
    const auto in = testing::random_instance(n, C, 900 + trial);
    const auto ref = oracle::enumerate_patterns(in.H, in.c, in.z, C);
    const QpProblem p = in.problem();
    const double eps = 1e-9 * std::max(1.0, ref.x.lpNorm<Eigen::Infinity>());
    CHECK(kkt_report(p, ref.x, eps).rel_residual <= 1e-9);

    // Move along a feasible direction inside the box: no longer optimal.
    Vector y = ref.x;
    Index i = 0, j = 1;
    while (j < n && in.z(j) != in.z(i)) ++j;
    if (j == n) continue;
    const double room = std::min(C < kInfinity ? C - y(i) : 1.0, y(j));
    if (room <= 1e-3) continue;
    y(i) += 0.5 * room;
    y(j) -= 0.5 * room;
    CHECK(objective(p, y) > objective(p, ref.x));
    CHECK(kkt_report(p, y, eps).rel_residual > 0.0);
  }
}

}  // TEST_SUITE
