#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmusvm/observer.hpp"
#include "cmusvm/qp_model.hpp"

namespace cmusvm {

struct SmoOptions {
  std::optional<long> max_iters;     // 1000 n (greedy) or 10000 n (random) when unset
  double kkt_tol = 1e-10;            // on KktReport::rel_residual
  std::optional<double> eps_active;  // default_eps_active(C) when unset
  std::uint64_t seed = 0;            // random variant only
  long q_check_period = 0;           // objective evaluated every this many steps; 0 means n
  bool record_trace = true;
  SolverObserver* observer = nullptr;
};

struct SmoState {
  Vector x;
  Vector g;        // Hx - c, updated incrementally, recomputed every n steps
  Vector g_tilde;  // g - (g'z / n) z
  long iter = 0;
  double eps = 0.0;
};

/// Starts at x = 0.
SmoState make_smo_state(const QpProblem& p, std::optional<double> eps_active = {});

/// Recomputes g from scratch and g~ from g.
void refresh_gradient(const QpProblem& p, SmoState& st);

/// Pair and signed step: the move is x_i += step, x_j -= z_i z_j step.
struct SmoSelection {
  Index i = -1;
  Index j = -1;
  double step = 0.0;
  double model = 0.0;  // step*a + step^2/2*h, the exact change of q
};

/// Greedy two-stage choice: i maximizes |s~_i| for s~ the tangent-cone
/// projection of -g~, then j minimizes the one-dimensional model among the
/// candidates passing the sign filter. Empty when s~ = 0 or no candidate
/// gives a negative model value.
std::optional<SmoSelection> gsmo_select(const QpProblem& p, const SmoState& st);

/// Applies the move, updates g and g~, and increments iter. Throws
/// InfeasibleIterate if a coordinate leaves the box by more than eps.
void smo_step(const QpProblem& p, SmoState& st, Index i, Index j, double step);

enum class SmoStatus { converged, stalled, max_iterations };

std::string to_string(SmoStatus s);

struct SmoResult {
  Vector x;
  KktReport kkt;
  SmoStatus status = SmoStatus::max_iterations;
  bool converged = false;
  long iterations = 0;  // selection attempts; for the random variant every draw counts
  long steps = 0;       // moves actually applied
  double q_final = 0.0;
  std::vector<std::pair<long, double>> q_trace;  // (iteration, q)
  long q_increases = 0;  // checkpoints where q rose by more than 1e-12 max(1,|q|)
};

SmoResult solve_gsmo(const QpProblem& p, const SmoOptions& opts = {});

/// Pairs i != j drawn uniformly from a generator seeded with opts.seed; each
/// draw takes the exact minimizing step clipped to both bounds.
SmoResult solve_rsmo(const QpProblem& p, const SmoOptions& opts = {});

}  // namespace cmusvm
