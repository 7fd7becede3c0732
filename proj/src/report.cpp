#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cmusvm/harness.hpp"

namespace cmusvm {

namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json bound_to_json(double C) { return std::isfinite(C) ? json(C) : json("inf"); }

double bound_from_json(const json& j) {
  return j.is_string() ? parse_bound(j.get<std::string>()) : j.get<double>();
}

template <class T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from_json(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json config_to_json(const ExperimentConfig& c) {
  return {
      {"label", c.label},
      {"data",
       {{"kind", to_string(c.data.kind)},
        {"d", c.data.d},
        {"delta", c.data.delta},
        {"n", c.data.n},
        {"path", c.data.path},
        {"test_path", c.data.test_path}}},
      {"gamma", c.gamma},
      {"C", bound_to_json(c.C)},
      {"solver", to_string(c.solver)},
      {"eps_active", optional_to_json(c.eps_active)},
      {"kkt_tol", c.kkt_tol},
      {"max_iters", optional_to_json(c.max_iters)},
      {"inactive_cap", optional_to_json(c.inactive_cap)},
      {"test_size", c.test_size},
      {"seed", c.seed},
      {"out", c.out},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.label = j.at("label").get<std::string>();
  const json& d = j.at("data");
  c.data.kind = parse_data_kind(d.at("kind").get<std::string>());
  c.data.d = d.at("d").get<int>();
  c.data.delta = d.at("delta").get<double>();
  c.data.n = d.at("n").get<Index>();
  c.data.path = d.at("path").get<std::string>();
  c.data.test_path = d.at("test_path").get<std::string>();
  c.gamma = j.at("gamma").get<double>();
  c.C = bound_from_json(j.at("C"));
  c.solver = parse_solver(j.at("solver").get<std::string>());
  c.eps_active = optional_from_json<double>(j, "eps_active");
  c.kkt_tol = j.at("kkt_tol").get<double>();
  c.max_iters = optional_from_json<long>(j, "max_iters");
  c.inactive_cap = optional_from_json<Index>(j, "inactive_cap");
  c.test_size = j.at("test_size").get<Index>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.out = j.at("out").get<std::string>();
  return c;
}

json report_to_json(const ExperimentReport& r) {
  return {
      {"schema_version", r.schema_version},
      {"label", r.label},
      {"solver", r.solver},
      {"cycles", optional_to_json(r.cycles)},
      {"inner_iterations", r.inner_iterations},
      {"wall_time_s", r.wall_time_s},
      {"kkt_rel", number_or_null(r.kkt_rel)},
      {"q_final", number_or_null(r.q_final)},
      {"x_inf_norm", number_or_null(r.x_inf_norm)},
      {"err_pos", optional_to_json(r.err_pos)},
      {"err_neg", optional_to_json(r.err_neg)},
      {"status", r.status},
      {"converged", r.converged},
      {"config", config_to_json(r.config)},
      {"software_version", r.software_version},
      {"seed", r.seed},
      {"diagnostics",
       {{"n", r.n},
        {"support_vectors", r.support_vectors},
        {"free_support_vectors", r.free_support_vectors},
        {"bias", r.bias},
        {"bias_discrepancy", r.bias_discrepancy},
        {"newton_steps", r.newton_steps},
        {"newton_q_increases", r.newton_q_increases},
        {"upcycle_q_increases", r.upcycle_q_increases},
        {"train_errors", r.train_errors}}},
  };
}

double double_or_nan(const json& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

ExperimentReport report_from(const json& j) {
  ExperimentReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != ExperimentReport::kSchemaVersion) {
    throw std::runtime_error("unsupported report schema_version " + std::to_string(r.schema_version));
  }
  r.label = j.at("label").get<std::string>();
  r.solver = j.at("solver").get<std::string>();
  r.cycles = optional_from_json<int>(j, "cycles");
  r.inner_iterations = j.at("inner_iterations").get<long>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  r.kkt_rel = double_or_nan(j.at("kkt_rel"));
  r.q_final = double_or_nan(j.at("q_final"));
  r.x_inf_norm = double_or_nan(j.at("x_inf_norm"));
  r.err_pos = optional_from_json<double>(j, "err_pos");
  r.err_neg = optional_from_json<double>(j, "err_neg");
  r.status = j.at("status").get<std::string>();
  r.converged = j.at("converged").get<bool>();
  r.config = config_from_json(j.at("config"));
  r.software_version = j.at("software_version").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  const json& d = j.at("diagnostics");
  r.n = d.at("n").get<Index>();
  r.support_vectors = d.at("support_vectors").get<Index>();
  r.free_support_vectors = d.at("free_support_vectors").get<Index>();
  r.bias = d.at("bias").get<double>();
  r.bias_discrepancy = d.at("bias_discrepancy").get<double>();
  r.newton_steps = d.at("newton_steps").get<long>();
  r.newton_q_increases = d.at("newton_q_increases").get<long>();
  r.upcycle_q_increases = d.at("upcycle_q_increases").get<long>();
  r.train_errors = d.at("train_errors").get<Index>();
  return r;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string opt_num(const std::optional<double>& v, const char* f) {
  return v ? fmt(f, *v) : std::string();
}

}  // namespace

std::string to_json(const ExperimentReport& r, int indent) { return report_to_json(r).dump(indent); }

std::string to_json(const std::vector<ExperimentReport>& rs, int indent) {
  json arr = json::array();
  for (const auto& r : rs) arr.push_back(report_to_json(r));
  return arr.dump(indent);
}

ExperimentReport report_from_json(const std::string& text) { return report_from(json::parse(text)); }

std::string to_csv(const std::vector<ExperimentReport>& rs) {
  std::ostringstream os;
  os << "label,solver,cycles,inner_iterations,wall_time_s,kkt_rel,q_final,x_inf_norm,"
        "err_pos,err_neg,status,converged,n,d,gamma,C,seed\n";
  for (const auto& r : rs) {
    os << csv_field(r.label) << ',' << r.solver << ','
       << (r.cycles ? std::to_string(*r.cycles) : "") << ',' << r.inner_iterations << ','
       << fmt("%.6g", r.wall_time_s) << ',' << fmt("%.17g", r.kkt_rel) << ','
       << fmt("%.17g", r.q_final) << ',' << fmt("%.17g", r.x_inf_norm) << ','
       << opt_num(r.err_pos, "%.17g") << ',' << opt_num(r.err_neg, "%.17g") << ',' << r.status
       << ',' << (r.converged ? "true" : "false") << ',' << r.n << ',' << r.config.data.d << ','
       << fmt("%.17g", r.config.gamma) << ',' << fmt("%.17g", r.config.C) << ',' << r.seed << '\n';
  }
  return os.str();
}

std::string to_text(const std::vector<ExperimentReport>& rs) {
  std::size_t width = 5;
  for (const auto& r : rs) width = std::max(width, r.label.size());
  const int w = static_cast<int>(width);

  std::ostringstream os;
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %6s  %10s  %9s  %13s  %10s  %14s  %s\n", w, "label",
                "cycles", "iterations", "time", "KKT violation", "q(x_final)", "||x_final||_inf",
                "rel class. errors");
  os << line;
  for (const auto& r : rs) {
    const std::string cycles = r.cycles ? std::to_string(*r.cycles) : "-";
    const std::string errors = r.err_pos && r.err_neg
                                   ? fmt("%.4f", *r.err_pos) + ", " + fmt("%.4f", *r.err_neg)
                                   : std::string("-");
    std::snprintf(line, sizeof line, "%-*s  %6s  %10ld  %9.2f  %13.1e  %10.1e  %15.1e  %s\n", w,
                  r.label.c_str(), cycles.c_str(), r.inner_iterations, r.wall_time_s, r.kkt_rel,
                  r.q_final, r.x_inf_norm, errors.c_str());
    os << line;
  }
  return os.str();
}

std::string trace_csv(const std::vector<ExperimentReport>& rs) {
  std::ostringstream os;
  os << "label,solver,iteration,q\n";
  for (const auto& r : rs) {
    for (const auto& [it, q] : r.q_trace) {
      os << csv_field(r.label) << ',' << r.solver << ',' << it << ',' << fmt("%.17g", q) << '\n';
    }
  }
  return os.str();
}

ReportFormat parse_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "text" || name == "txt") return ReportFormat::text;
  throw std::invalid_argument("unknown format '" + name + "' (expected json, csv or text)");
}

std::string format_report(const std::vector<ExperimentReport>& rs, ReportFormat f) {
  switch (f) {
    case ReportFormat::json: return (rs.size() == 1 ? to_json(rs.front()) : to_json(rs)) + "\n";
    case ReportFormat::csv: return to_csv(rs);
    case ReportFormat::text: return to_text(rs);
  }
  return {};
}

void emit_report(const std::vector<ExperimentReport>& rs, ReportFormat f, const std::string& path) {
  const std::string body = format_report(rs, f);
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path);
  out << body;
  out.close();
  if (!out) throw std::runtime_error("cannot write report to " + path);
}

}  // namespace cmusvm
