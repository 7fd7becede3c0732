#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmusvm/observer.hpp"
#include "cmusvm/qp_model.hpp"

namespace cmusvm {

enum class SolverKind { cmu, gsmo, rsmo };

std::string to_string(SolverKind s);
/// Accepts "cmu", "gsmo", "rsmo" (any case); throws std::invalid_argument.
SolverKind parse_solver(const std::string& name);

/// Parses a bound; "inf" (any case) gives kInfinity.
double parse_bound(const std::string& text);

struct DataSpec {
  enum class Kind { halfmoon, checkerboard, file };
  Kind kind = Kind::halfmoon;
  int d = 2;
  double delta = 0.25;
  Index n = 500;
  std::string path;       // training CSV for Kind::file
  std::string test_path;  // optional test CSV for Kind::file

  bool operator==(const DataSpec&) const = default;
};

std::string to_string(DataSpec::Kind k);
DataSpec::Kind parse_data_kind(const std::string& name);

struct ExperimentConfig {
  std::string label;  // row name in summaries
  DataSpec data;
  double gamma = 0.03;
  double C = kInfinity;
  SolverKind solver = SolverKind::cmu;
  std::optional<double> eps_active;
  double kkt_tol = 1e-10;
  std::optional<long> max_iters;  // SMO iterations, or CMU cycles
  std::optional<Index> inactive_cap;
  Index test_size = 100000;
  std::uint64_t seed = 1;
  std::string out;

  bool operator==(const ExperimentConfig&) const = default;

  /// Throws std::invalid_argument for non-positive gamma/C/test size/tolerance
  /// or an incomplete data description.
  void validate() const;
};

struct ExperimentReport {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::string label;
  std::string solver;
  std::optional<int> cycles;  // CMU only
  long inner_iterations = 0;
  double wall_time_s = 0.0;
  double kkt_rel = 0.0;
  double q_final = 0.0;
  double x_inf_norm = 0.0;
  std::optional<double> err_pos;  // absent without test data
  std::optional<double> err_neg;
  std::string status;
  bool converged = false;
  ExperimentConfig config;
  std::string software_version;
  std::uint64_t seed = 0;

  // Diagnostics.
  Index n = 0;
  Index support_vectors = 0;
  Index free_support_vectors = 0;
  double bias = 0.0;
  double bias_discrepancy = 0.0;
  long newton_steps = 0;
  long newton_q_increases = 0;
  long upcycle_q_increases = 0;
  Index train_errors = 0;

  std::vector<std::pair<long, double>> q_trace;  // (iteration, q); not part of JSON

  bool operator==(const ExperimentReport&) const = default;
};

std::string software_version();

/// Generates or loads data, solves, builds the classifier and scores it on
/// test_size fresh points (or the test file). The observer, if any, is
/// forwarded to the solver.
ExperimentReport run_experiment(const ExperimentConfig& cfg, SolverObserver* observer = nullptr);

/// Rows of tables 1, 2, 4 and 5; table 3 only with scaled = true (n = 2000,
/// CMU rows). Throws std::invalid_argument for other ids.
std::vector<ExperimentConfig> table_configs(int table, bool scaled, std::uint64_t seed);

struct TableRun {
  int table = 0;
  std::vector<ExperimentReport> reports;
  std::vector<std::string> files;
};

/// Runs every row, writing one JSON report per row plus a text summary, a CSV
/// summary and the q traces as plot data into out_dir (created if missing).
/// An empty out_dir writes nothing.
TableRun run_table(int table, const std::string& out_dir, bool scaled = false,
                   std::uint64_t seed = 1, SolverObserver* observer = nullptr);

enum class ReportFormat { json, csv, text };
ReportFormat parse_format(const std::string& name);

std::string to_json(const ExperimentReport& r, int indent = 2);
std::string to_json(const std::vector<ExperimentReport>& rs, int indent = 2);
ExperimentReport report_from_json(const std::string& text);
std::string to_csv(const std::vector<ExperimentReport>& rs);
std::string to_text(const std::vector<ExperimentReport>& rs);
/// Columns: label,solver,iteration,q.
std::string trace_csv(const std::vector<ExperimentReport>& rs);

std::string format_report(const std::vector<ExperimentReport>& rs, ReportFormat f);

/// Writes the formatted reports to path ("-" for stdout). Throws
/// std::runtime_error naming the path on I/O failure.
void emit_report(const std::vector<ExperimentReport>& rs, ReportFormat f, const std::string& path);

}  // namespace cmusvm
