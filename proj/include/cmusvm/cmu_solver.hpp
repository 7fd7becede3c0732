#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmusvm/dense_linalg.hpp"
#include "cmusvm/observer.hpp"
#include "cmusvm/qp_model.hpp"

namespace cmusvm {

struct CmuOptions {
  std::optional<double> eps_active;  // default_eps_active(C) when unset
  double kkt_tol = 1e-10;            // on KktReport::rel_residual
  Index inactive_cap = 2000;         // size limit for the first inactive set
  Index upcycle_floor = 100;         // inactive-set growth always allowed up to this
  std::optional<double> reg;         // default_regularization(H_KK) when unset
  int refine_steps = 2;
  int max_cycles = 100;
  bool record_trace = true;
  SolverObserver* observer = nullptr;
};

enum class UpCycleCase { case1, case2, fail };

struct UpCycleStep {
  UpCycleCase kind = UpCycleCase::fail;
  Vector s;                         // zero on failure
  std::vector<Index> increasing;    // I: active, z_i s~_i > 0
  std::vector<Index> decreasing;    // J: active, z_i s~_i < 0
  Index i = -1;                     // case 2 pivot pair
  Index j = -1;
};

struct ReducedDirection {
  double mu = 0.0;
  Vector g_tilde;  // g - mu z
  Vector s_tilde;  // tangent-cone projection of -g~
};

struct LineSearchResult {
  double step = 0.0;
  double exact_step = 0.0;  // -g's / s'Hs
  double max_step = kInfinity;
  bool hit_bound = false;
  Index blocking = -1;
  Vector x_next;
  double q_change = 0.0;    // step*g's + step^2/2 s'Hs
};

/// Everything a CMU solve carries between phases.
struct SolverState {
  Vector x;
  Vector g;
  ActivePartition part;
  std::optional<CholFactor> factor;  // factors H_KK (+reg I) with index_map = K
  double eps = 0.0;
  double q = 0.0;                    // tracked objective at x

  int cycles = 0;                    // Cholesky factorizations
  long inner_iterations = 0;         // up-cycle steps + Newton steps
  long upcycle_steps = 0;
  long newton_steps = 0;
  long newton_q_increases = 0;
  long upcycle_q_increases = 0;
  bool optimal = false;              // last up-cycle failed at its first step
  std::vector<double> q_trace;
};

ReducedDirection reduced_direction(const QpProblem& p, const Vector& x,
                                   const ActivePartition& part);
ReducedDirection reduced_direction(const QpProblem& p, const Vector& g,
                                   const Vector& x, const ActivePartition& part);

UpCycleStep upcycle_direction(const Vector& g_tilde, const Vector& s_tilde,
                              const Vector& z, const ActivePartition& part);

/// Exact minimization along s, truncated at the box. Throws
/// std::invalid_argument if s is not a descent direction and
/// std::domain_error if s'Hs <= 0.
LineSearchResult line_search(const QpProblem& p, const Vector& x, const Vector& s);
LineSearchResult line_search(const QpProblem& p, const Vector& x, const Vector& g,
                             const Vector& s);

/// State at x with an accurate gradient and the objective anchored there.
SolverState make_state(const QpProblem& p, Vector x, const CmuOptions& opts);

/// First-order phase: moves active indices into the inactive set until a
/// direction fails, n steps were taken, or |K| reached
/// min(n, max(upcycle_floor, ceil(1.5 |K_entry|))). Sets state.optimal when
/// the very first direction fails.
void up_cycle(const QpProblem& p, SolverState& st, const CmuOptions& opts);

/// Feasible start: line search from 0 along the null-space projection of c,
/// restricted to the inactive_cap most promising indices when that point has
/// more inactive variables than the cap allows.
Vector starting_point(const QpProblem& p, const CmuOptions& opts);

/// Newton phase on the inactive set. Factors H_KK once, then alternates
/// equality-constrained Newton steps with single-index deletions from the
/// factor until a full step stays inside the box.
void newton_sweep(const QpProblem& p, SolverState& st, const CmuOptions& opts);

enum class CmuStatus { optimal, tolerance, max_cycles };

std::string to_string(CmuStatus s);

struct CmuResult {
  Vector x;
  KktReport kkt;
  CmuStatus status = CmuStatus::max_cycles;
  bool converged = false;
  double q_final = 0.0;
  int cycles = 0;
  long inner_iterations = 0;
  long upcycle_steps = 0;
  long newton_steps = 0;
  long newton_q_increases = 0;
  long upcycle_q_increases = 0;
  std::vector<double> q_trace;
};

CmuResult solve_cmu(const QpProblem& p, const CmuOptions& opts = {});

}  // namespace cmusvm
