#pragma once

#include <string>

#include <Eigen/Core>

namespace cmusvm::oracle {

// Reference solvers for min 1/2 x'Hx - c'x s.t. z'x = 0, 0 <= x <= C, used to
// cross-check the production solvers. They share no code with them.

struct OracleResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  std::string method;       // "enumeration" or "projected_gradient"
  double residual = 0.0;    // projected-gradient fixed-point residual at x
  long iterations = 0;      // patterns tried or gradient steps taken
};

double objective(const Eigen::MatrixXd& H, const Eigen::VectorXd& c, const Eigen::VectorXd& x);

/// Euclidean projection onto {0 <= x <= C, z'x = 0}.
Eigen::VectorXd project_feasible(const Eigen::VectorXd& y, const Eigen::VectorXd& z, double C);

/// ||x - P(x - g)||_inf, zero exactly at the minimizer.
double fixed_point_residual(const Eigen::MatrixXd& H, const Eigen::VectorXd& c,
                            const Eigen::VectorXd& z, double C, const Eigen::VectorXd& x);

/// Tries every lower/free/upper pattern (lower/free when C is infinite),
/// solving the equality-constrained problem on the free set, and keeps the
/// best primal-feasible candidate.
OracleResult enumerate_patterns(const Eigen::MatrixXd& H, const Eigen::VectorXd& c,
                                const Eigen::VectorXd& z, double C);

/// Projected gradient with step 1/||H||_2 until the fixed-point residual is at
/// most tol * max(1, ||x||_inf).
OracleResult projected_gradient(const Eigen::MatrixXd& H, const Eigen::VectorXd& c,
                                const Eigen::VectorXd& z, double C, double tol = 1e-12,
                                long max_iters = 5'000'000);

/// Enumeration while the number of patterns stays at or below max_patterns,
/// projected gradient otherwise.
OracleResult solve(const Eigen::MatrixXd& H, const Eigen::VectorXd& c, const Eigen::VectorXd& z,
                   double C, double max_patterns = 59049.0);

}  // namespace cmusvm::oracle
