#include "cmusvm/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "cmusvm/cmu_solver.hpp"
#include "cmusvm/datagen.hpp"
#include "cmusvm/error.hpp"
#include "cmusvm/smo.hpp"
#include "cmusvm/svm.hpp"

#ifndef CMUSVM_VERSION
#define CMUSVM_VERSION "unknown"
#endif

namespace cmusvm {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

struct LoadedData {
  Dataset train;
  std::optional<Dataset> test;
};

LoadedData load_data(const ExperimentConfig& cfg) {
  const DataSpec& d = cfg.data;
  switch (d.kind) {
    case DataSpec::Kind::halfmoon: {
      GeneratedData g = gen_halfmoon({d.d, d.delta, d.n, cfg.seed});
      LoadedData out{std::move(g.train), std::nullopt};
      if (cfg.test_size > 0) out.test = g.test.sample(cfg.test_size);
      return out;
    }
    case DataSpec::Kind::checkerboard: {
      GeneratedData g = gen_checkerboard(d.n, cfg.seed);
      LoadedData out{std::move(g.train), std::nullopt};
      if (cfg.test_size > 0) out.test = g.test.sample(cfg.test_size);
      return out;
    }
    case DataSpec::Kind::file: {
      LoadedData out{read_dataset_csv(d.path), std::nullopt};
      if (!d.test_path.empty()) out.test = read_dataset_csv(d.test_path);
      return out;
    }
  }
  throw std::logic_error("unhandled data kind");
}

}  // namespace

std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::cmu: return "cmu";
    case SolverKind::gsmo: return "gsmo";
    case SolverKind::rsmo: return "rsmo";
  }
  return "unknown";
}

SolverKind parse_solver(const std::string& name) {
  const std::string s = lower(name);
  if (s == "cmu") return SolverKind::cmu;
  if (s == "gsmo") return SolverKind::gsmo;
  if (s == "rsmo") return SolverKind::rsmo;
  throw std::invalid_argument("unknown solver '" + name + "' (expected cmu, gsmo or rsmo)");
}

double parse_bound(const std::string& text) {
  const std::string s = lower(text);
  if (s == "inf" || s == "infinity" || s == "+inf") return kInfinity;
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument("cannot parse bound '" + text + "'");
  return v;
}

std::string to_string(DataSpec::Kind k) {
  switch (k) {
    case DataSpec::Kind::halfmoon: return "halfmoon";
    case DataSpec::Kind::checkerboard: return "checkerboard";
    case DataSpec::Kind::file: return "file";
  }
  return "unknown";
}

DataSpec::Kind parse_data_kind(const std::string& name) {
  const std::string s = lower(name);
  if (s == "halfmoon") return DataSpec::Kind::halfmoon;
  if (s == "checkerboard") return DataSpec::Kind::checkerboard;
  if (s == "file") return DataSpec::Kind::file;
  throw std::invalid_argument("unknown data kind '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive and finite");
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  if (!(kkt_tol > 0.0)) throw std::invalid_argument("kkt_tol must be positive");
  if (test_size < 0) throw std::invalid_argument("test_size must be non-negative");
  if (eps_active && !(*eps_active > 0.0)) throw std::invalid_argument("eps must be positive");
  if (max_iters && *max_iters <= 0) throw std::invalid_argument("max_iters must be positive");
  if (inactive_cap && *inactive_cap <= 0) throw std::invalid_argument("inactive_cap must be positive");
  if (data.kind == DataSpec::Kind::file && data.path.empty()) {
    throw std::invalid_argument("file data needs a path");
  }
  if (data.kind != DataSpec::Kind::file && data.n < 2) throw std::invalid_argument("n must be at least 2");
}

std::string software_version() { return CMUSVM_VERSION; }

ExperimentReport run_experiment(const ExperimentConfig& cfg, SolverObserver* observer) {
  cfg.validate();
  LoadedData data = load_data(cfg);
  const Dataset& train = data.train;
  const Matrix K = gaussian_kernel(train.points, cfg.gamma);
  const QpProblem p = assemble_problem(K, train.labels, cfg.C);
  const double eps = cfg.eps_active.value_or(default_eps_active(cfg.C));

  ExperimentReport r;
  r.label = cfg.label;
  r.solver = to_string(cfg.solver);
  r.config = cfg;
  r.software_version = software_version();
  r.seed = cfg.seed;
  r.n = train.size();

  Vector x;
  KktReport kkt;
  const auto start = std::chrono::steady_clock::now();
  if (cfg.solver == SolverKind::cmu) {
    CmuOptions o;
    o.eps_active = cfg.eps_active;
    o.kkt_tol = cfg.kkt_tol;
    if (cfg.max_iters) o.max_cycles = static_cast<int>(*cfg.max_iters);
    if (cfg.inactive_cap) o.inactive_cap = *cfg.inactive_cap;
    o.observer = observer;
    CmuResult res = solve_cmu(p, o);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.cycles = res.cycles;
    r.inner_iterations = res.inner_iterations;
    r.status = to_string(res.status);
    r.converged = res.converged;
    r.q_final = res.q_final;
    r.newton_steps = res.newton_steps;
    r.newton_q_increases = res.newton_q_increases;
    r.upcycle_q_increases = res.upcycle_q_increases;
    for (std::size_t k = 0; k < res.q_trace.size(); ++k) {
      r.q_trace.emplace_back(static_cast<long>(k), res.q_trace[k]);
    }
    x = std::move(res.x);
    kkt = res.kkt;
  } else {
    SmoOptions o;
    o.max_iters = cfg.max_iters;
    o.kkt_tol = cfg.kkt_tol;
    o.eps_active = cfg.eps_active;
    o.seed = cfg.seed;
    o.observer = observer;
    SmoResult res = cfg.solver == SolverKind::gsmo ? solve_gsmo(p, o) : solve_rsmo(p, o);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.inner_iterations = res.iterations;
    r.status = to_string(res.status);
    r.converged = res.converged;
    r.q_final = res.q_final;
    r.q_trace = std::move(res.q_trace);
    x = std::move(res.x);
    kkt = res.kkt;
  }
  r.kkt_rel = kkt.rel_residual;
  r.x_inf_norm = kkt.x_inf_norm;

  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) > eps) {
      ++r.support_vectors;
      if (bound_sign(x(i), cfg.C, eps) == 0) ++r.free_support_vectors;
    }
  }
  if (r.support_vectors > 0) {
    const BiasEstimate b = recover_bias(K, train.labels, x, cfg.C, kkt.mu, eps);
    r.bias_discrepancy = b.discrepancy;
  }
  const SvmModel model = make_model(train, cfg.gamma, cfg.C, std::move(x), kkt.mu);
  r.bias = model.bias;

  const Vector f_train = decision_function(model, train.points);
  for (Index i = 0; i < train.size(); ++i) {
    if ((f_train(i) >= 0.0 ? 1.0 : -1.0) != train.labels(i)) ++r.train_errors;
  }
  if (data.test) {
    const ClassErrors e = classification_errors(model, *data.test);
    r.err_pos = e.err_pos;
    r.err_neg = e.err_neg;
  }
  return r;
}

std::vector<ExperimentConfig> table_configs(int table, bool scaled, std::uint64_t seed) {
  ExperimentConfig base;
  base.seed = seed;
  base.data.kind = DataSpec::Kind::halfmoon;
  base.data.d = 2;
  base.data.delta = 0.25;
  base.data.n = 500;
  base.gamma = 0.03;
  base.C = kInfinity;

  std::vector<ExperimentConfig> rows;
  auto add = [&](ExperimentConfig c, std::string label) {
    c.label = std::move(label);
    rows.push_back(std::move(c));
  };
  switch (table) {
    case 1:
      for (double gamma : {0.03, 0.3, 3.0}) {
        ExperimentConfig c = base;
        c.gamma = gamma;
        add(c, "gamma=" + std::string(gamma == 0.03 ? "0.03" : gamma == 0.3 ? "0.3" : "3"));
      }
      break;
    case 2: {
      add(base, "CMU");
      ExperimentConfig g = base;
      g.solver = SolverKind::gsmo;
      g.max_iters = 1000 * base.data.n;
      add(g, "GSMO");
      ExperimentConfig r = base;
      r.solver = SolverKind::rsmo;
      r.max_iters = 10000 * base.data.n;
      add(r, "RSMO");
      break;
    }
    case 3: {
      if (!scaled) {
        throw std::invalid_argument("table 3 is only available as the scaled variant (n = 2000)");
      }
      // The first inactive set is capped at n/5, the same ratio as 2000 of 10000.
      const std::vector<std::pair<int, double>> cells{{3, 0.03}, {5, 0.03}, {5, 3.0}};
      for (const auto& [d, gamma] : cells) {
        ExperimentConfig c = base;
        c.data.n = 2000;
        c.data.d = d;
        c.gamma = gamma;
        c.inactive_cap = 400;
        add(c, "CMU d=" + std::to_string(d) + (gamma == 3.0 ? " gamma=3" : " gamma=0.03") +
                   " (scaled n=2000)");
      }
      break;
    }
    case 4:
      for (int d : {2, 3, 5, 10, 50}) {
        ExperimentConfig c = base;
        c.data.d = d;
        add(c, "d=" + std::to_string(d));
      }
      break;
    case 5: {
      ExperimentConfig c = base;
      c.data.kind = DataSpec::Kind::checkerboard;
      add(c, "CMU");
      for (long iters : {500000L, 5000000L}) {
        ExperimentConfig g = c;
        g.solver = SolverKind::gsmo;
        g.max_iters = iters;
        add(g, "GSMO " + std::to_string(iters));
      }
      break;
    }
    default:
      throw std::invalid_argument("unknown table " + std::to_string(table) +
                                  " (expected 1, 2, 4, 5 or 3 with --scaled)");
  }
  return rows;
}

TableRun run_table(int table, const std::string& out_dir, bool scaled, std::uint64_t seed,
                   SolverObserver* observer) {
  const std::vector<ExperimentConfig> rows = table_configs(table, scaled, seed);
  TableRun run;
  run.table = table;
  const std::string stem = "table" + std::to_string(table) + (scaled ? "_scaled" : "");
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  for (std::size_t k = 0; k < rows.size(); ++k) {
    run.reports.push_back(run_experiment(rows[k], observer));
    if (!out_dir.empty()) {
      const std::string path = out_dir + "/" + stem + "_row" + std::to_string(k + 1) + ".json";
      emit_report({run.reports.back()}, ReportFormat::json, path);
      run.files.push_back(path);
    }
  }
  if (!out_dir.empty()) {
    const std::string base = out_dir + "/" + stem;
    emit_report(run.reports, ReportFormat::text, base + ".txt");
    emit_report(run.reports, ReportFormat::csv, base + ".csv");
    std::ofstream trace(base + "_trace.csv");
    trace << trace_csv(run.reports);
    if (!trace) throw std::runtime_error("cannot write " + base + "_trace.csv");
    run.files.insert(run.files.end(), {base + ".txt", base + ".csv", base + "_trace.csv"});
  }
  return run;
}

}  // namespace cmusvm
