#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmusvm/error.hpp"
#include "cmusvm/svm.hpp"

namespace cmusvm {

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(field, &used));
      while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used]))) ++used;
      if (used != field.size()) return false;
    } catch (const std::exception&) {
      return false;
    }
  }
  return !out.empty();
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path);

  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!parse_row(line, row)) {
      if (line_no == 1) continue;  // header
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DimensionMismatch(path + ":" + std::to_string(line_no) + ": column count changes");
    }
    if (row.size() < 2) {
      throw DimensionMismatch(path + ":" + std::to_string(line_no) + ": need coordinates and a label");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  const auto n = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(rows.front().size()) - 1;
  Dataset ds{Matrix(n, d), Vector(n)};
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d; ++k) ds.points(i, k) = rows[i][k];
    ds.labels(i) = rows[i][d];
  }
  ds.validate();
  return ds;
}

void write_dataset_csv(const std::string& path, const Dataset& ds, bool header) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write dataset " + path);
  if (header) {
    for (Index k = 0; k < ds.dim(); ++k) std::fprintf(f, "x%ld,", static_cast<long>(k + 1));
    std::fprintf(f, "label\n");
  }
  for (Index i = 0; i < ds.size(); ++i) {
    for (Index k = 0; k < ds.dim(); ++k) std::fprintf(f, "%.17g,", ds.points(i, k));
    std::fprintf(f, "%d\n", ds.labels(i) > 0 ? 1 : -1);
  }
  if (std::fclose(f) != 0) throw std::runtime_error("error writing dataset " + path);
}

}  // namespace cmusvm
