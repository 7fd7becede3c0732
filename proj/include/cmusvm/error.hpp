#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cmusvm {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem data that violates the well-posedness requirements.
class IllPosedProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the Cholesky routines when a pivot is not strictly positive.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(Eigen::Index pivot, double value)
      : std::runtime_error("matrix is not positive definite: pivot " +
                           std::to_string(pivot) + " is " +
                           std::to_string(value)),
        pivot_(pivot),
        value_(value) {}

  Eigen::Index pivot() const noexcept { return pivot_; }
  double value() const noexcept { return value_; }

 private:
  Eigen::Index pivot_;
  double value_;
};

/// An iterate left the feasible set, or multipliers could not be formed.
class InfeasibleIterate : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cmusvm
