#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "cmusvm/cmu_solver.hpp"
#include "cmusvm/datagen.hpp"
#include "cmusvm/error.hpp"
#include "cmusvm/svm.hpp"

using namespace cmusvm;

namespace {

Dataset two_points() {
  Dataset ds{Matrix{{0.0, 0.0}, {1.0, 0.0}}, Vector{{1.0, -1.0}}};
  return ds;
}

}  // namespace

TEST_SUITE("svm") {

TEST_CASE("gaussian kernel") {
  std::mt19937_64 eng(1);
  std::normal_distribution<double> normal;
  Matrix pts(30, 3);
  for (Index i = 0; i < pts.size(); ++i) pts.data()[i] = normal(eng);
  const Matrix K = gaussian_kernel(pts, 0.7);
  CHECK(K.diagonal() == Vector::Ones(30));
  CHECK(K == K.transpose());
  CHECK(K.minCoeff() > 0.0);

  const Matrix K2 = gaussian_kernel(two_points().points, 3.0);
  CHECK(K2(0, 1) == doctest::Approx(std::exp(-3.0)));
  CHECK(K2(0, 1) == doctest::Approx(0.049787).epsilon(1e-5));
  CHECK_THROWS_AS(gaussian_kernel(pts, 0.0), std::invalid_argument);
}

TEST_CASE("assemble_problem") {
  const Matrix K{{1.0, 0.3}, {0.3, 1.0}};
  const QpProblem same = assemble_problem(K, Vector{{1.0, -1.0}}, kInfinity);
  CHECK(same.hessian() == Matrix{{1.0, -0.3}, {-0.3, 1.0}});
  CHECK(same.linear() == Vector::Ones(2));
  CHECK(same.kernel_normalized());
  CHECK_THROWS_AS(assemble_problem(K, Vector{{1.0, 1.0}}, kInfinity), IllPosedProblem);
  CHECK_THROWS_AS(assemble_problem(K, Vector::Ones(3), kInfinity), DimensionMismatch);

  // z = e would give H = K; with both labels required, check the sign pattern.
  const Matrix K3 = Matrix::Constant(3, 3, 0.5) + 0.5 * Matrix::Identity(3, 3);
  const Vector z{{1.0, 1.0, -1.0}};
  const QpProblem p = assemble_problem(K3, z, 1.0);
  CHECK(p.hessian()(0, 1) == 0.5);
  CHECK(p.hessian()(0, 2) == -0.5);
}

TEST_CASE("decision function and bias") {
  SvmModel empty = make_model(two_points(), 1.0, kInfinity, Vector::Zero(2), 0.0);
  CHECK(decision_function(empty, Vector{{0.3, 0.3}}) == 0.0);
  CHECK(predict(empty, Vector{{0.3, 0.3}}) == 1.0);
  CHECK_THROWS_AS(decision_function(empty, Vector(Vector::Zero(3))), DimensionMismatch);

  // alpha = (1, 1), gamma = 1: f(t) = e^{-|t|^2} - e^{-|t - e1|^2} + b.
  SvmModel m = make_model(two_points(), 1.0, kInfinity, Vector::Ones(2), -0.25);
  CHECK(m.bias == 0.25);
  CHECK(decision_function(m, Vector{{0.5, 0.0}}) == doctest::Approx(0.25));
  CHECK(decision_function(m, Vector{{0.0, 0.0}}) == doctest::Approx(1.0 - std::exp(-1.0) + 0.25));
  const Vector batch = decision_function(m, Matrix{{0.5, 0.0}, {0.0, 0.0}});
  CHECK(batch(0) == doctest::Approx(0.25));

  // Free-SV formula with K = I gives b = z_1 - alpha_1 z_1 = 0, matching mu = 0.
  const BiasEstimate b = recover_bias(Matrix::Identity(2, 2), Vector{{1.0, -1.0}}, Vector::Ones(2),
                                      kInfinity, 0.0, 1e-9);
  CHECK(b.bias == 0.0);
  REQUIRE(b.free_mean.has_value());
  CHECK(*b.free_mean == 0.0);
  CHECK(b.free_count == 2);
  CHECK_THROWS_AS(recover_bias(Matrix::Identity(2, 2), Vector{{1.0, -1.0}}, Vector::Zero(2),
                               kInfinity, 0.0, 1e-9),
                  IllPosedProblem);
}

TEST_CASE("classification errors") {
  const Dataset test{Matrix{{0.0, 0.0}, {0.1, 0.0}, {1.0, 0.0}}, Vector{{1.0, 1.0, -1.0}}};
  const SvmModel always_pos = make_model(two_points(), 1.0, kInfinity, Vector::Zero(2), -1.0);
  const ClassErrors e = classification_errors(always_pos, test);
  CHECK(e.err_pos == 0.0);
  CHECK(e.err_neg == 1.0);

  const SvmModel good = make_model(two_points(), 1.0, kInfinity, Vector::Ones(2), 0.0);
  const ClassErrors perfect = classification_errors(good, test);
  CHECK(perfect.err_pos == 0.0);
  CHECK(perfect.err_neg == 0.0);

  const Dataset one_class{Matrix{{0.0, 0.0}}, Vector{{1.0}}};
  CHECK_THROWS_AS(classification_errors(good, one_class), std::invalid_argument);
}

TEST_CASE("trained half-moon model is self-consistent") {
  GeneratedData data = gen_halfmoon({2, 0.25, 120, 3});
  const double gamma = 3.0;
  const Matrix K = gaussian_kernel(data.train.points, gamma);
  const QpProblem p = assemble_problem(K, data.train.labels, kInfinity);
  const CmuResult r = solve_cmu(p);
  REQUIRE(r.converged);
  CHECK(r.kkt.rel_residual <= 1e-8);
  const double eps = default_eps_active(kInfinity);
  const SvmModel m = make_model(data.train, gamma, kInfinity, r.x, r.kkt.mu);

  const BiasEstimate b = recover_bias(K, data.train.labels, r.x, kInfinity, r.kkt.mu, eps);
  REQUIRE(b.free_mean.has_value());
  CHECK(b.discrepancy <= 1e-4 * std::max(1.0, std::abs(b.bias)));

  const double scale = std::max(1.0, r.x.lpNorm<Eigen::Infinity>());
  for (Index i = 0; i < r.x.size(); ++i) {
    const double f = decision_function(m, Vector(data.train.points.row(i).transpose()));
    // Hard margin: every training point is on the right side.
    CHECK(f * data.train.labels(i) > 0.0);
    if (r.x(i) > eps) CHECK(std::abs(data.train.labels(i) * f - 1.0) <= 1e-6 * scale);
  }

  // Permuting the training points leaves the classifier unchanged.
  std::vector<Index> perm(static_cast<std::size_t>(r.x.size()));
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<Index>(perm.size() - 1 - k);
  Dataset shuffled{Matrix(data.train.points.rows(), 2), Vector(data.train.size())};
  Vector alpha(r.x.size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    shuffled.points.row(static_cast<Index>(k)) = data.train.points.row(perm[k]);
    shuffled.labels(static_cast<Index>(k)) = data.train.labels(perm[k]);
    alpha(static_cast<Index>(k)) = r.x(perm[k]);
  }
  const SvmModel mp = make_model(shuffled, gamma, kInfinity, alpha, r.kkt.mu);
  const Dataset probe = data.test.sample(40);
  for (Index t = 0; t < probe.size(); ++t) {
    const Vector pt = probe.points.row(t).transpose();
    CHECK(decision_function(mp, pt) == doctest::Approx(decision_function(m, pt)).epsilon(1e-10));
  }
}

TEST_CASE("dataset csv round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "cmusvm_svm_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "data.csv").string();
  GeneratedData g = gen_halfmoon({3, 0.25, 16, 9});
  write_dataset_csv(path, g.train);
  const Dataset back = read_dataset_csv(path);
  CHECK(back.points == g.train.points);
  CHECK(back.labels == g.train.labels);

  write_dataset_csv(path, g.train, false);
  CHECK(read_dataset_csv(path).points == g.train.points);

  std::FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("x,label\n0.5,1\n0.25,2\n", f);
  std::fclose(f);
  CHECK_THROWS_AS(read_dataset_csv(path), IllPosedProblem);
  CHECK_THROWS(read_dataset_csv((dir / "missing.csv").string()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("dataset validation") {
  Dataset bad{Matrix{{0.0}, {std::nan("")}}, Vector{{1.0, -1.0}}};
  CHECK_THROWS_AS(bad.validate(), IllPosedProblem);
  Dataset mismatch{Matrix::Zero(2, 1), Vector::Ones(3)};
  CHECK_THROWS_AS(mismatch.validate(), DimensionMismatch);
}

}  // TEST_SUITE
