#include "cmusvm/smo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmusvm/error.hpp"
#include "cmusvm/rng.hpp"

namespace cmusvm {

namespace {

constexpr double kIncreaseTolerance = 1e-12;

void update_g_tilde(const Vector& z, SmoState& st) {
  const double mu = st.g.dot(z) / static_cast<double>(z.size());
  st.g_tilde = st.g - mu * z;
}

double pair_curvature(const QpProblem& p, Index i, Index j, double zz) {
  const Matrix& H = p.hessian();
  if (p.kernel_normalized()) return 2.0 - 2.0 * zz * H(i, j);
  return H(i, i) + H(j, j) - 2.0 * zz * H(i, j);
}

// Puts a coordinate that overshot a bound by rounding back on the bound.
double settle(double v, double C, double eps) {
  if (v < 0.0) {
    if (v < -eps) throw InfeasibleIterate("smo_step: coordinate below 0 beyond tolerance");
    return 0.0;
  }
  if (C < kInfinity) {
    if (v > C + eps) throw InfeasibleIterate("smo_step: coordinate above C beyond tolerance");
    if (v >= C - 4.0 * std::numeric_limits<double>::epsilon() * C) return C;
  }
  return v;
}

// Shared driver. pick returns the next move (step 0 is allowed and only
// advances the counter) or nothing when the method cannot continue.
template <class Pick>
SmoResult run_smo(const QpProblem& p, const SmoOptions& opts, long default_factor, Pick pick) {
  const Index n = p.size();
  SmoState st = make_smo_state(p, opts.eps_active);
  const long max_iters = opts.max_iters.value_or(default_factor * n);
  const long period = opts.q_check_period > 0 ? opts.q_check_period : n;

  SmoResult r;
  double last_q = 0.0;
  if (opts.record_trace) r.q_trace.emplace_back(0, last_q);

  for (;;) {
    if (st.iter % n == 0) {
      refresh_gradient(p, st);
      if (kkt_report(p, st.x, st.g, st.eps).rel_residual <= opts.kkt_tol) {
        r.status = SmoStatus::converged;
        r.converged = true;
        break;
      }
    }
    if (st.iter >= max_iters) {
      r.status = SmoStatus::max_iterations;
      break;
    }
    const std::optional<SmoSelection> sel = pick(st);
    if (!sel) {
      refresh_gradient(p, st);
      const bool kkt = kkt_report(p, st.x, st.g, st.eps).rel_residual <= opts.kkt_tol;
      r.status = kkt ? SmoStatus::converged : SmoStatus::stalled;
      r.converged = kkt;
      break;
    }
    if (sel->step != 0.0) ++r.steps;
    smo_step(p, st, sel->i, sel->j, sel->step);

    double q = std::numeric_limits<double>::quiet_NaN();
    if (st.iter % period == 0) {
      q = objective(p, st.x);
      if (q - last_q > kIncreaseTolerance * std::max(1.0, std::abs(last_q))) {
        ++r.q_increases;
        if (opts.observer) opts.observer->on_objective_increase(Phase::smo, last_q, q);
      }
      last_q = q;
      if (opts.record_trace) r.q_trace.emplace_back(st.iter, q);
    }
    if (opts.observer) opts.observer->on_iterate(Phase::smo, st.x, q);
  }

  r.kkt = kkt_report(p, st.x, st.eps);
  r.q_final = objective(p, st.x);
  if (opts.record_trace && (r.q_trace.empty() || r.q_trace.back().first != st.iter)) {
    r.q_trace.emplace_back(st.iter, r.q_final);
  }
  r.iterations = st.iter;
  r.x = std::move(st.x);
  return r;
}

}  // namespace

std::string to_string(SmoStatus s) {
  switch (s) {
    case SmoStatus::converged: return "converged";
    case SmoStatus::stalled: return "stalled";
    case SmoStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

SmoState make_smo_state(const QpProblem& p, std::optional<double> eps_active) {
  SmoState st;
  st.eps = eps_active.value_or(default_eps_active(p.upper_bound()));
  st.x = Vector::Zero(p.size());
  st.g = -p.linear();
  update_g_tilde(p.labels(), st);
  return st;
}

void refresh_gradient(const QpProblem& p, SmoState& st) {
  st.g = gradient(p, st.x);
  update_g_tilde(p.labels(), st);
}

std::optional<SmoSelection> gsmo_select(const QpProblem& p, const SmoState& st) {
  const Index n = p.size();
  const double C = p.upper_bound();
  const Vector& z = p.labels();
  const Vector& gt = st.g_tilde;
  const Vector s = project_tangent_cone(st.x, -gt, C, st.eps);

  Index i = 0;
  for (Index k = 1; k < n; ++k) {
    if (std::abs(s(k)) > std::abs(s(i))) i = k;
  }
  if (s(i) == 0.0) return std::nullopt;
  const double limit_i = std::abs(s(i) <= 0.0 ? -st.x(i) : C - st.x(i));

  std::optional<SmoSelection> best;
  double best_model = 0.0;
  for (Index j = 0; j < n; ++j) {
    if (j == i) continue;
    const double zz = z(i) * z(j);
    const double a = gt(i) - zz * gt(j);
    if (!(gt(i) * a > 0.0)) continue;
    const double h = pair_curvature(p, i, j, zz);
    if (!(h > 0.0)) continue;
    const double exact = -a / h;
    // x_j moves by -zz * step: it decreases when zz * step > 0.
    const double limit_j = std::max(0.0, zz * exact > 0.0 ? st.x(j) : C - st.x(j));
    const double step = std::copysign(std::min({std::abs(exact), limit_j, limit_i}), exact);
    const double model = step * a + 0.5 * step * step * h;
    if (model < best_model) {
      best_model = model;
      best = SmoSelection{i, j, step, model};
    }
  }
  return best;
}

void smo_step(const QpProblem& p, SmoState& st, Index i, Index j, double step) {
  ++st.iter;
  if (step == 0.0) return;
  const Vector& z = p.labels();
  const Matrix& H = p.hessian();
  const double C = p.upper_bound();
  const double zz = z(i) * z(j);
  const double step_j = -zz * step;

  st.x(i) = settle(st.x(i) + step, C, st.eps);
  st.x(j) = settle(st.x(j) + step_j, C, st.eps);

  const double* hi = H.col(i).data();
  const double* hj = H.col(j).data();
  for (Index k = 0; k < st.g.size(); ++k) {
    st.g(k) = std::fma(step_j, hj[k], std::fma(step, hi[k], st.g(k)));
  }
  update_g_tilde(z, st);
}

SmoResult solve_gsmo(const QpProblem& p, const SmoOptions& opts) {
  return run_smo(p, opts, 1000, [&](const SmoState& st) { return gsmo_select(p, st); });
}

SmoResult solve_rsmo(const QpProblem& p, const SmoOptions& opts) {
  const Index n = p.size();
  const double C = p.upper_bound();
  const Vector& z = p.labels();
  Rng rng(opts.seed);

  auto pick = [&](const SmoState& st) -> std::optional<SmoSelection> {
    const auto i = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));
    auto j = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n - 1)));
    if (j >= i) ++j;
    SmoSelection sel{i, j, 0.0, 0.0};
    const double zz = z(i) * z(j);
    const double a = st.g(i) - zz * st.g(j);
    const double h = pair_curvature(p, i, j, zz);
    if (a == 0.0 || !(h > 0.0)) return sel;

    double lo = -st.x(i);
    double hi = C - st.x(i);
    if (zz > 0.0) {
      lo = std::max(lo, st.x(j) - C);
      hi = std::min(hi, st.x(j));
    } else {
      lo = std::max(lo, -st.x(j));
      hi = std::min(hi, C - st.x(j));
    }
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
    sel.step = std::clamp(-a / h, lo, hi);
    sel.model = sel.step * a + 0.5 * sel.step * sel.step * h;
    return sel;
  };
  return run_smo(p, opts, 10000, pick);
}

}  // namespace cmusvm
