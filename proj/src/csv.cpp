#include "shiftlab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace shiftlab {

namespace {

std::vector<std::vector<double>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw std::runtime_error(path + ": ragged row (expected " +
                               std::to_string(width) + " columns)");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<Point> read_points_csv(const std::string& path) {
  const auto rows = read_rows(path);
  std::vector<Point> pts;
  pts.reserve(rows.size());
  for (const auto& row : rows) {
    Point p(static_cast<int>(row.size()));
    for (std::size_t j = 0; j < row.size(); ++j) p[static_cast<int>(j)] = row[j];
    pts.push_back(std::move(p));
  }
  return pts;
}

std::vector<LabeledExample> read_labeled_csv(const std::string& path) {
  const auto rows = read_rows(path);
  std::vector<LabeledExample> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() < 2)
      throw std::runtime_error(path + ": labeled rows need >= 2 columns");
    const double label = row.back();
    if (label != 1.0 && label != -1.0)
      throw std::runtime_error(path + ": label column must be +1 or -1");
    Point p(static_cast<int>(row.size()) - 1);
    for (std::size_t j = 0; j + 1 < row.size(); ++j)
      p[static_cast<int>(j)] = row[j];
    out.push_back({std::move(p), label > 0 ? +1 : -1});
  }
  return out;
}

void write_points_csv(const std::string& path, const std::vector<Point>& pts) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& p : pts) {
    for (int j = 0; j < p.size(); ++j) {
      if (j) out << ',';
      out << format_value(p[j]);
    }
    out << '\n';
  }
}

void write_labeled_csv(const std::string& path,
                       const std::vector<LabeledExample>& examples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& e : examples) {
    for (int j = 0; j < e.x.size(); ++j) out << format_value(e.x[j]) << ',';
    out << (e.y > 0 ? "+1" : "-1") << '\n';
  }
}

}  // namespace shiftlab
