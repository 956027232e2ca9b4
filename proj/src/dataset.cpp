#include "sbc/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sbc {

namespace {

bool parse_cell(const std::string& cell, double& out) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Dataset parse_dataset(const std::string& csv_text) {
  std::vector<std::vector<double>> rows;
  std::stringstream stream(csv_text);
  std::string line;
  int line_no = 0;
  size_t arity = 0;
  bool header_allowed = true;

  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const std::vector<std::string> cells = split_csv(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (size_t j = 0; j < cells.size(); ++j) {
      if (!parse_cell(cells[j], row[j])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (header_allowed) {  // first content line may be a header
        header_allowed = false;
        arity = cells.size();
        continue;
      }
      throw std::runtime_error("load_dataset: non-numeric cell at line " +
                               std::to_string(line_no));
    }
    header_allowed = false;
    if (arity == 0) arity = row.size();
    if (row.size() != arity)
      throw std::runtime_error("load_dataset: inconsistent column count at line " +
                               std::to_string(line_no));
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw std::runtime_error("load_dataset: no data rows");
  if (arity < 2)
    throw std::runtime_error("load_dataset: need at least one feature and a label");

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(arity - 1);
  Dataset ds;
  ds.x.resize(n, d);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) ds.x(i, j) = rows[i][j];
    ds.y[i] = rows[i][arity - 1];
  }

  ds.feature_mean = ds.x.colwise().mean();
  ds.feature_std.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var =
        (ds.x.col(j).array() - ds.feature_mean[j]).square().sum() / n;
    const double sd = std::sqrt(var);
    ds.feature_std[j] = (sd > 0.0) ? sd : 1.0;  // constant-column guard
    ds.x.col(j) = (ds.x.col(j).array() - ds.feature_mean[j]) / ds.feature_std[j];
  }
  return ds;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str());
}

double nmse(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
  if (actual.size() != predicted.size())
    throw std::invalid_argument("nmse: length mismatch");
  if (actual.size() < 2) throw std::invalid_argument("nmse: need at least two points");
  const double n = static_cast<double>(actual.size());
  const double mean = actual.mean();
  const double var = (actual.array() - mean).square().sum() / n;
  if (!(var > 0.0)) throw std::invalid_argument("nmse: zero label variance");
  const double mse = (actual - predicted).squaredNorm() / n;
  return mse / var;
}

}  // namespace sbc
