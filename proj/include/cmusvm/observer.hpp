#pragma once

#include "cmusvm/qp_model.hpp"

namespace cmusvm {

struct UpCycleStep;

enum class Phase { start, upcycle, newton, smo };

/// Hooks invoked synchronously on the solving thread. Default implementations
/// do nothing; tests use them to check per-step invariants.
class SolverObserver {
 public:
  virtual ~SolverObserver() = default;

  /// After every accepted iterate. q is NaN when the solver did not evaluate
  /// the objective at this step.
  virtual void on_iterate(Phase, const Vector& /*x*/, double /*q*/) {}

  /// Every up-cycle direction, including failures, before the line search.
  virtual void on_upcycle_direction(const Vector& /*g*/, const Vector& /*z*/,
                                    const ActivePartition& /*part*/,
                                    const UpCycleStep& /*step*/) {}

  virtual void on_newton_direction(const Vector& /*z_K*/, const Vector& /*dx_K*/) {}

  /// The tracked objective rose by more than 1e-12 * max(1, |q|).
  virtual void on_objective_increase(Phase, double /*before*/, double /*after*/) {}
};

}  // namespace cmusvm
