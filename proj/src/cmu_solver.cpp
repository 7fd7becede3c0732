#include "cmusvm/cmu_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cmusvm/detail/compensated.hpp"
#include "cmusvm/error.hpp"

namespace cmusvm {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kIncreaseTolerance = 1e-12;
constexpr int kMaxRegularizationRetries = 8;

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::vector<Index> support_of(const Vector& s) {
  std::vector<Index> idx;
  for (Index k = 0; k < s.size(); ++k) {
    if (s(k) != 0.0) idx.push_back(k);
  }
  return idx;
}

// H(:, idx) * d as an unevaluated double-double per row.
struct DoubleDoubleVector {
  Vector hi;
  Vector lo;
};

DoubleDoubleVector hessian_times(const Matrix& H, const std::vector<Index>& idx,
                                 const Vector& d) {
  const Index n = H.rows();
  DoubleDoubleVector out{Vector::Zero(n), Vector::Zero(n)};
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const double da = d(static_cast<Index>(a));
    if (da != 0.0) {
      detail::accumulate_column(H.col(idx[a]).data(), da, out.hi.data(), out.lo.data(), n);
    }
  }
  return out;
}

// d' H(idx, idx) d.
double quad_form(const Matrix& H, const std::vector<Index>& idx, const Vector& d) {
  detail::CompensatedSum total;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const double* col = H.col(idx[a]).data();
    detail::CompensatedSum row;
    for (std::size_t b = 0; b < idx.size(); ++b) row.add_product(col[idx[b]], d(static_cast<Index>(b)));
    total.add_product(d(static_cast<Index>(a)), row.hi);
    total.add_product(d(static_cast<Index>(a)), row.lo);
  }
  return total.value();
}

// Moves the iterate by delta on idx, keeps g = Hx - c current, and returns the
// exact change of q for that move (given the current g).
double apply_move(const QpProblem& p, SolverState& st, const std::vector<Index>& idx,
                  const Vector& delta) {
  const DoubleDoubleVector hd = hessian_times(p.hessian(), idx, delta);

  detail::CompensatedSum dq;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const double da = delta(static_cast<Index>(a));
    const Index k = idx[a];
    dq.add_product(da, st.g(k));
    dq.add_product(da, 0.5 * hd.hi(k));
    dq.add_product(da, 0.5 * hd.lo(k));
    st.x(k) += da;
  }
  for (Index i = 0; i < st.g.size(); ++i) {
    detail::CompensatedSum gi(st.g(i));
    gi.add(hd.hi(i));
    gi.add(hd.lo(i));
    st.g(i) = gi.value();
  }
  return dq.value();
}

void record_objective(SolverState& st, Phase phase, double dq, const CmuOptions& opts) {
  const double before = st.q;
  st.q += dq;
  if (dq > kIncreaseTolerance * std::max(1.0, std::abs(before))) {
    (phase == Phase::newton ? st.newton_q_increases : st.upcycle_q_increases) += 1;
    if (opts.observer) opts.observer->on_objective_increase(phase, before, st.q);
  }
  if (opts.record_trace) st.q_trace.push_back(st.q);
  if (opts.observer) opts.observer->on_iterate(phase, st.x, st.q);
}

CholFactor factor_inactive_block(const Matrix& H, const std::vector<Index>& K, double reg) {
  for (int attempt = 0;; ++attempt) {
    try {
      return cholesky(H, K, reg);
    } catch (const NotPositiveDefinite&) {
      if (attempt >= kMaxRegularizationRetries) throw;
      reg *= 10.0;
    }
  }
}

}  // namespace

std::string to_string(CmuStatus s) {
  switch (s) {
    case CmuStatus::optimal: return "optimal";
    case CmuStatus::tolerance: return "tolerance";
    case CmuStatus::max_cycles: return "max_cycles";
  }
  return "unknown";
}

ReducedDirection reduced_direction(const QpProblem& p, const Vector& x,
                                   const ActivePartition& part) {
  return reduced_direction(p, gradient(p, x), x, part);
}

ReducedDirection reduced_direction(const QpProblem& p, const Vector& g, const Vector& x,
                                   const ActivePartition& part) {
  ReducedDirection rd;
  rd.mu = multiplier_mu(g, p.labels(), part);
  rd.g_tilde = g - rd.mu * p.labels();
  rd.s_tilde = project_tangent_cone(x, -rd.g_tilde, p.upper_bound(), part.eps);
  return rd;
}

UpCycleStep upcycle_direction(const Vector& g_tilde, const Vector& s_tilde,
                              const Vector& z, const ActivePartition& part) {
  const Index n = z.size();
  UpCycleStep step;
  step.s = Vector::Zero(n);

  for (Index i : part.active) {
    const double t = z(i) * s_tilde(i);
    if (t > 0.0) step.increasing.push_back(i);
    else if (t < 0.0) step.decreasing.push_back(i);
  }
  const auto& I = step.increasing;
  const auto& J = step.decreasing;

  if (!I.empty() && !J.empty()) {
    double v1 = 0.0, v2 = 0.0;
    for (Index i : I) v1 += z(i) * s_tilde(i);
    for (Index j : J) v2 += z(j) * s_tilde(j);
    for (Index i : I) step.s(i) = -v2 * s_tilde(i);
    for (Index j : J) step.s(j) = v1 * s_tilde(j);
    if (detail::accurate_dot(g_tilde, step.s) < 0.0) {
      step.kind = UpCycleCase::case1;
    } else {
      step.s.setZero();
    }
    return step;
  }
  if (I.empty() && J.empty()) return step;

  Index i = -1;
  double best_abs = 0.0;
  for (Index a : part.active) {
    if (std::abs(s_tilde(a)) > best_abs) {
      best_abs = std::abs(s_tilde(a));
      i = a;
    }
  }
  const double sgn = sign_of(s_tilde(i));

  Index j = -1;
  double best = -kInfinity;
  for (Index k = 0; k < n; ++k) {
    if (k == i) continue;
    if (part.sigma(i) * part.sigma(k) * z(i) * z(k) > 0.0) continue;
    const double val = sgn * z(i) * z(k) * g_tilde(k);
    if (val > best) {
      best = val;
      j = k;
    }
  }
  step.i = i;
  step.j = j;
  if (j < 0) return step;

  const double slope = sgn * g_tilde(i) - sgn * z(i) * z(j) * g_tilde(j);
  if (!(slope < 0.0)) return step;

  step.kind = UpCycleCase::case2;
  step.s(i) = sgn;
  step.s(j) = -sgn * z(i) * z(j);
  return step;
}

LineSearchResult line_search(const QpProblem& p, const Vector& x, const Vector& s) {
  return line_search(p, x, gradient(p, x), s);
}

LineSearchResult line_search(const QpProblem& p, const Vector& x, const Vector& g,
                             const Vector& s) {
  if (x.size() != p.size() || g.size() != p.size() || s.size() != p.size()) {
    throw DimensionMismatch("line_search: vector lengths must equal n");
  }
  const double C = p.upper_bound();
  const std::vector<Index> supp = support_of(s);
  Vector s_supp(static_cast<Index>(supp.size()));
  detail::CompensatedSum gs;
  for (std::size_t a = 0; a < supp.size(); ++a) {
    s_supp(static_cast<Index>(a)) = s(supp[a]);
    gs.add_product(g(supp[a]), s(supp[a]));
  }
  const double slope = gs.value();
  const double curvature = quad_form(p.hessian(), supp, s_supp);
  if (!(curvature > 0.0)) {
    throw std::domain_error("line_search: s'Hs is not positive");
  }
  if (!(slope < 0.0)) throw std::invalid_argument("line_search: s is not a descent direction");

  LineSearchResult r;
  r.exact_step = -slope / curvature;

  std::vector<double> ratio(supp.size(), kInfinity);
  for (std::size_t a = 0; a < supp.size(); ++a) {
    const Index k = supp[a];
    if (s(k) > 0.0 && C < kInfinity) ratio[a] = std::max(0.0, (C - x(k)) / s(k));
    else if (s(k) < 0.0) ratio[a] = std::max(0.0, -x(k) / s(k));
    if (ratio[a] < r.max_step) {
      r.max_step = ratio[a];
      r.blocking = k;
    }
  }
  r.hit_bound = r.max_step <= r.exact_step;
  r.step = r.hit_bound ? r.max_step : r.exact_step;
  if (!r.hit_bound) r.blocking = -1;

  r.x_next = x;
  for (std::size_t a = 0; a < supp.size(); ++a) {
    const Index k = supp[a];
    double v = x(k) + r.step * s(k);
    if (r.hit_bound && ratio[a] <= r.max_step * (1.0 + kTieTolerance)) {
      v = s(k) > 0.0 ? C : 0.0;
    }
    r.x_next(k) = std::clamp(v, 0.0, C);
  }
  r.q_change = r.step * slope + 0.5 * r.step * r.step * curvature;
  return r;
}

SolverState make_state(const QpProblem& p, Vector x, const CmuOptions& opts) {
  SolverState st;
  st.eps = opts.eps_active.value_or(default_eps_active(p.upper_bound()));
  st.x = std::move(x);
  st.g = gradient(p, st.x);
  st.part = active_partition(st.x, p.upper_bound(), st.eps);
  st.q = objective(p, st.x);
  if (opts.record_trace) st.q_trace.push_back(st.q);
  return st;
}

void up_cycle(const QpProblem& p, SolverState& st, const CmuOptions& opts) {
  const Index n = p.size();
  const Vector& z = p.labels();
  st.optimal = false;
  st.factor.reset();
  st.part = active_partition(st.x, p.upper_bound(), st.eps);

  const auto entry = static_cast<Index>(st.part.inactive.size());
  const Index grown = static_cast<Index>(std::ceil(1.5 * static_cast<double>(entry)));
  const Index cap = std::min(n, std::max(opts.upcycle_floor, grown));

  for (Index k = 0;;) {
    const ReducedDirection rd = reduced_direction(p, st.g, st.x, st.part);
    const UpCycleStep step = upcycle_direction(rd.g_tilde, rd.s_tilde, z, st.part);
    if (opts.observer) opts.observer->on_upcycle_direction(st.g, z, st.part, step);
    if (step.kind == UpCycleCase::fail) {
      if (k == 0) st.optimal = true;
      break;
    }

    const LineSearchResult ls = line_search(p, st.x, st.g, step.s);
    const std::vector<Index> supp = support_of(step.s);
    Vector delta(static_cast<Index>(supp.size()));
    for (std::size_t a = 0; a < supp.size(); ++a) {
      delta(static_cast<Index>(a)) = ls.x_next(supp[a]) - st.x(supp[a]);
    }
    const double dq = apply_move(p, st, supp, delta);
    for (Index i : supp) st.x(i) = ls.x_next(i);  // exact bound values

    ++k;
    ++st.upcycle_steps;
    ++st.inner_iterations;
    st.part = active_partition(st.x, p.upper_bound(), st.eps);
    record_objective(st, Phase::upcycle, dq, opts);

    if (k >= n || static_cast<Index>(st.part.inactive.size()) >= cap) break;
  }
}

Vector starting_point(const QpProblem& p, const CmuOptions& opts) {
  const Index n = p.size();
  const Vector& z = p.labels();
  const Vector& c = p.linear();

  const Vector s = project_nullspace(z, c);
  if (!(s.minCoeff() > 0.0)) {
    throw IllPosedProblem("starting_point: projection of c onto z'x = 0 must be positive");
  }
  const Vector zero = Vector::Zero(n);
  const Vector g0 = -c;
  const LineSearchResult first = line_search(p, zero, g0, s);
  if (first.hit_bound || n <= opts.inactive_cap) return first.x_next;

  const Vector& x = first.x_next;
  const Vector score = x - project_nullspace(z, gradient(p, x));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return score(a) > score(b); });
  std::vector<Index> chosen(order.begin(), order.begin() + opts.inactive_cap);

  // A one-class subset has a zero restricted direction; swap in the best
  // candidate of the missing label.
  const bool has_pos = std::any_of(chosen.begin(), chosen.end(), [&](Index i) { return z(i) > 0; });
  const bool has_neg = std::any_of(chosen.begin(), chosen.end(), [&](Index i) { return z(i) < 0; });
  if (!has_pos || !has_neg) {
    const double missing = has_pos ? -1.0 : 1.0;
    const auto it = std::find_if(order.begin() + opts.inactive_cap, order.end(),
                                 [&](Index i) { return z(i) == missing; });
    chosen.back() = *it;
  }

  double zx = 0.0;
  for (Index i : chosen) zx += z(i) * x(i);
  const double shift = zx / static_cast<double>(chosen.size());
  Vector d = Vector::Zero(n);
  for (Index i : chosen) d(i) = std::max(0.0, x(i) - shift * z(i));
  return line_search(p, zero, g0, d).x_next;
}

void newton_sweep(const QpProblem& p, SolverState& st, const CmuOptions& opts) {
  const Matrix& H = p.hessian();
  const Vector& z = p.labels();
  const double C = p.upper_bound();

  st.part = active_partition(st.x, C, st.eps);
  std::vector<Index> K = st.part.inactive;
  if (K.empty()) {
    st.factor.reset();
    return;
  }
  st.g = gradient(p, st.x);

  const double reg = opts.reg.value_or(default_regularization(H, K));
  CholFactor F = factor_inactive_block(H, K, reg);
  ++st.cycles;

  for (;;) {
    const auto m = static_cast<Index>(K.size());
    Matrix rhs(m, 2);
    Vector zK(m);
    for (Index a = 0; a < m; ++a) {
      rhs(a, 0) = -st.g(K[a]);
      rhs(a, 1) = z(K[a]);
      zK(a) = z(K[a]);
    }
    const RefinedSolution sol = refine_solution(F, H, rhs, opts.refine_steps);
    const Vector u = sol.x.col(0);
    const Vector v = sol.x.col(1);
    const double zv = detail::accurate_dot(zK, v);
    if (!(zv > 0.0)) throw std::domain_error("newton_sweep: z_K'v <= 0, H_KK is not positive definite");
    const double eta = detail::accurate_dot(zK, u) / zv;
    Vector dx = u - eta * v;
    // Remove the rounding residue of the cancellation; z_K'z_K = m.
    dx -= (detail::accurate_dot(zK, dx) / static_cast<double>(m)) * zK;
    if (opts.observer) opts.observer->on_newton_direction(zK, dx);

    double alpha = 1.0;
    Vector ratio = Vector::Constant(m, kInfinity);
    for (Index a = 0; a < m; ++a) {
      const double xk = st.x(K[a]);
      if (dx(a) < 0.0) ratio(a) = std::max(0.0, xk / -dx(a));
      else if (dx(a) > 0.0 && C < kInfinity) ratio(a) = std::max(0.0, (C - xk) / dx(a));
      alpha = std::min(alpha, ratio(a));
    }
    const bool hit = alpha < 1.0;
    // Only one index joins the active set per step; among simultaneous
    // blockers the smallest original index wins (K is ascending).
    Index blocker = -1;
    if (hit) {
      for (Index a = 0; a < m; ++a) {
        if (ratio(a) <= alpha * (1.0 + kTieTolerance)) {
          blocker = a;
          break;
        }
      }
    }

    Vector target(m);
    for (Index a = 0; a < m; ++a) {
      target(a) = std::clamp(st.x(K[a]) + alpha * dx(a), 0.0, C);
    }
    if (hit) target(blocker) = dx(blocker) < 0.0 ? 0.0 : C;
    Vector delta(m);
    for (Index a = 0; a < m; ++a) delta(a) = target(a) - st.x(K[a]);

    const double dq = apply_move(p, st, K, delta);
    for (Index a = 0; a < m; ++a) st.x(K[a]) = target(a);
    ++st.newton_steps;
    ++st.inner_iterations;
    record_objective(st, Phase::newton, dq, opts);

    if (!hit) break;
    F = delete_index(std::move(F), blocker);
    K.erase(K.begin() + blocker);
    if (K.empty()) break;
  }

  st.part = active_partition(st.x, C, st.eps);
  if (F.index_map() == st.part.inactive) st.factor = std::move(F);
  else st.factor.reset();
}

CmuResult solve_cmu(const QpProblem& p, const CmuOptions& opts) {
  SolverState st = make_state(p, starting_point(p, opts), opts);
  if (opts.observer) opts.observer->on_iterate(Phase::start, st.x, st.q);

  CmuResult r;
  for (int outer = 0; outer < opts.max_cycles; ++outer) {
    newton_sweep(p, st, opts);
    const KktReport kkt = kkt_report(p, st.x, st.g, st.eps);
    if (kkt.rel_residual <= opts.kkt_tol) {
      r.status = CmuStatus::tolerance;
      r.converged = true;
      break;
    }
    up_cycle(p, st, opts);
    if (st.optimal) {
      r.status = CmuStatus::optimal;
      r.converged = true;
      break;
    }
  }

  r.kkt = kkt_report(p, st.x, st.eps);
  r.q_final = objective(p, st.x);
  r.x = std::move(st.x);
  r.cycles = st.cycles;
  r.inner_iterations = st.inner_iterations;
  r.upcycle_steps = st.upcycle_steps;
  r.newton_steps = st.newton_steps;
  r.newton_q_increases = st.newton_q_increases;
  r.upcycle_q_increases = st.upcycle_q_increases;
  r.q_trace = std::move(st.q_trace);
  return r;
}

}  // namespace cmusvm
