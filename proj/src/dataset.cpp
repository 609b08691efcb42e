#include "bvs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bvs {

ModelId::ModelId(std::vector<int> indices) : idx_(std::move(indices)) {
  std::sort(idx_.begin(), idx_.end());
  idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
}

bool ModelId::contains(int column) const {
  return std::binary_search(idx_.begin(), idx_.end(), column);
}

ModelId ModelId::with(int column) const {
  std::vector<int> v = idx_;
  auto it = std::lower_bound(v.begin(), v.end(), column);
  if (it == v.end() || *it != column) v.insert(it, column);
  ModelId m;
  m.idx_ = std::move(v);
  return m;
}

ModelId ModelId::without(int column) const {
  std::vector<int> v = idx_;
  auto it = std::lower_bound(v.begin(), v.end(), column);
  if (it != v.end() && *it == column) v.erase(it);
  ModelId m;
  m.idx_ = std::move(v);
  return m;
}

std::string ModelId::to_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < idx_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(idx_[i]);
  }
  return s + "}";
}

bool SurvivalDataset::is_fixed(int column) const {
  return std::binary_search(fixed_columns.begin(), fixed_columns.end(), column);
}

Eigen::MatrixXd SurvivalDataset::submatrix(const ModelId& model) const {
  Eigen::MatrixXd out(n(), model.size());
  int j = 0;
  for (int col : model.indices()) {
    if (col < 0 || col >= p()) {
      throw std::out_of_range("submatrix: column index " + std::to_string(col) +
                              " out of range (p=" + std::to_string(p()) + ")");
    }
    out.col(j++) = design.col(col);
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

}  // namespace

SurvivalDataset make_dataset(Eigen::VectorXd times, Eigen::VectorXi status,
                             Eigen::MatrixXd design,
                             std::vector<std::string> column_names,
                             std::vector<int> fixed_columns,
                             bool standardize) {
  const int n = static_cast<int>(times.size());
  const int p = static_cast<int>(design.cols());
  if (n == 0) throw ValidationError("dataset has no rows");
  if (p == 0) throw ValidationError("dataset has no covariate columns");
  if (status.size() != n || design.rows() != n) {
    throw ValidationError("times/status/design row counts disagree");
  }
  if (static_cast<int>(column_names.size()) != p) {
    throw ValidationError("column name count does not match design columns");
  }
  std::sort(fixed_columns.begin(), fixed_columns.end());
  fixed_columns.erase(std::unique(fixed_columns.begin(), fixed_columns.end()),
                      fixed_columns.end());
  for (int c : fixed_columns) {
    if (c < 0 || c >= p) {
      throw ValidationError("fixed column index " + std::to_string(c) +
                            " out of range");
    }
  }

  int n_events = 0;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(times(i)) || times(i) < 0.0) {
      throw ValidationError("row " + std::to_string(i + 1) +
                            ": time must be a nonnegative number");
    }
    if (status(i) != 0 && status(i) != 1) {
      throw ValidationError("row " + std::to_string(i + 1) +
                            ": status must be 0 or 1, got " +
                            std::to_string(status(i)));
    }
    n_events += status(i);
  }
  if (n_events == 0) {
    throw ValidationError(
        "all records censored: partial likelihood is constant");
  }
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(design(i, j))) {
        throw ValidationError("non-finite value at row " + std::to_string(i + 1) +
                              ", column '" + column_names[j] + "'");
      }
    }
  }

  SurvivalDataset ds;
  ds.times = std::move(times);
  ds.status = std::move(status);
  ds.design = std::move(design);
  ds.column_names = std::move(column_names);
  ds.fixed_columns = std::move(fixed_columns);

  if (standardize) {
    ds.scale_center.assign(p, 0.0);
    ds.scale_factor.assign(p, 1.0);
    for (int j = 0; j < p; ++j) {
      if (ds.is_fixed(j)) continue;
      const double mean = ds.design.col(j).mean();
      double var = (ds.design.col(j).array() - mean).square().sum() /
                   std::max(1, n - 1);
      double sd = std::sqrt(var);
      if (sd <= 0.0) sd = 1.0;
      ds.design.col(j) = (ds.design.col(j).array() - mean) / sd;
      ds.scale_center[j] = mean;
      ds.scale_factor[j] = sd;
    }
  }

  return sort_by_time(ds);
}

SurvivalDataset sort_by_time(const SurvivalDataset& dataset) {
  const int n = dataset.n();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // ties broken deterministically: events before censorings, then input order
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (dataset.times(a) != dataset.times(b))
      return dataset.times(a) < dataset.times(b);
    return dataset.status(a) > dataset.status(b);
  });

  SurvivalDataset out = dataset;
  out.sort_permutation.resize(n);
  for (int i = 0; i < n; ++i) {
    const int src = order[i];
    out.sort_permutation[i] =
        dataset.sort_permutation.empty() ? src : dataset.sort_permutation[src];
    out.times(i) = dataset.times(src);
    out.status(i) = dataset.status(src);
    out.design.row(i) = dataset.design.row(src);
  }

  bool ties = false;
  for (int i = 1; i < n; ++i) {
    if (out.times(i) == out.times(i - 1)) {
      ties = true;
      break;
    }
  }
  out.had_ties = ties;
  if (ties && !dataset.had_ties) {
    out.warnings.push_back(
        "tied observed times detected; rank order fixed with events before "
        "censorings at equal times");
  }
  return out;
}

SurvivalDataset ingest_dataset(std::istream& source, const ColumnSchema& schema) {
  std::string header;
  if (!std::getline(source, header)) {
    throw ValidationError("empty input: header row required");
  }
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  std::vector<std::string> names = split_line(header, delim);
  for (auto& s : names) s = trim(s);

  auto find_col = [&](const std::string& name) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (names[j] == name) return static_cast<int>(j);
    }
    throw ValidationError("column '" + name + "' not found in header");
  };

  const int time_idx = find_col(schema.time_col);
  const int status_idx = find_col(schema.status_col);
  std::vector<int> fixed_idx;
  for (const auto& f : schema.fixed_cols) {
    const int j = find_col(trim(f));
    if (j == time_idx || j == status_idx) {
      throw ValidationError("fixed column '" + f +
                            "' is the time or status column");
    }
    fixed_idx.push_back(j);
  }

  std::vector<std::vector<std::string>> rows;
  std::string line;
  int lineno = 1;
  while (std::getline(source, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_line(line, delim);
    if (fields.size() != names.size()) {
      throw ValidationError("row " + std::to_string(lineno) + ": expected " +
                            std::to_string(names.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    rows.push_back(std::move(fields));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw ValidationError("no data rows");

  // covariate columns in header order: everything but time/status
  std::vector<int> covar_idx;
  for (std::size_t j = 0; j < names.size(); ++j) {
    const int ji = static_cast<int>(j);
    if (ji != time_idx && ji != status_idx) covar_idx.push_back(ji);
  }
  if (covar_idx.empty()) throw ValidationError("no covariate columns");

  Eigen::VectorXd times(n);
  Eigen::VectorXi status(n);
  for (int i = 0; i < n; ++i) {
    double t;
    if (!parse_double(rows[i][time_idx], t)) {
      throw ValidationError("row " + std::to_string(i + 2) + ", column '" +
                            schema.time_col + "': non-numeric time value '" +
                            rows[i][time_idx] + "'");
    }
    times(i) = t;
    double s;
    if (!parse_double(rows[i][status_idx], s) || (s != 0.0 && s != 1.0)) {
      throw ValidationError("row " + std::to_string(i + 2) + ", column '" +
                            schema.status_col + "': status must be 0 or 1, got '" +
                            rows[i][status_idx] + "'");
    }
    status(i) = static_cast<int>(s);
  }

  // Detect categorical fixed columns (any non-numeric cell) and expand them
  // to reference-coded indicators; first level in sorted order is reference.
  struct OutCol {
    std::string name;
    bool fixed;
    int src;                // source column
    bool indicator = false;
    std::string level;      // for indicators
  };
  std::vector<OutCol> out_cols;
  auto is_fixed_src = [&](int j) {
    return std::find(fixed_idx.begin(), fixed_idx.end(), j) != fixed_idx.end();
  };

  for (int j : covar_idx) {
    bool numeric = true;
    for (int i = 0; i < n && numeric; ++i) {
      double v;
      if (!parse_double(rows[i][j], v)) numeric = false;
    }
    const bool fixed = is_fixed_src(j);
    if (numeric) {
      out_cols.push_back({names[j], fixed, j});
    } else {
      if (!fixed) {
        for (int i = 0; i < n; ++i) {
          double v;
          if (!parse_double(rows[i][j], v)) {
            throw ValidationError(
                "row " + std::to_string(i + 2) + ", column '" + names[j] +
                "': non-numeric value '" + rows[i][j] +
                "' (categorical covariates are supported for fixed columns only)");
          }
        }
      }
      std::set<std::string> levels;
      for (int i = 0; i < n; ++i) levels.insert(trim(rows[i][j]));
      if (levels.size() < 2) {
        throw ValidationError("fixed column '" + names[j] +
                              "' has a single level; cannot encode");
      }
      bool first = true;
      for (const auto& lv : levels) {
        if (first) {  // reference level
          first = false;
          continue;
        }
        out_cols.push_back({names[j] + "_" + lv, true, j, true, lv});
      }
    }
  }

  const int p = static_cast<int>(out_cols.size());
  Eigen::MatrixXd design(n, p);
  std::vector<std::string> col_names(p);
  std::vector<int> fixed_columns;
  for (int c = 0; c < p; ++c) {
    const auto& oc = out_cols[c];
    col_names[c] = oc.name;
    if (oc.fixed) fixed_columns.push_back(c);
    for (int i = 0; i < n; ++i) {
      if (oc.indicator) {
        design(i, c) = trim(rows[i][oc.src]) == oc.level ? 1.0 : 0.0;
      } else {
        double v;
        if (!parse_double(rows[i][oc.src], v)) {
          throw ValidationError("row " + std::to_string(i + 2) + ", column '" +
                                oc.name + "': non-numeric value '" +
                                rows[i][oc.src] + "'");
        }
        design(i, c) = v;
      }
    }
  }

  return make_dataset(std::move(times), std::move(status), std::move(design),
                      std::move(col_names), std::move(fixed_columns),
                      schema.standardize);
}

SurvivalDataset ingest_dataset_file(const std::string& path,
                                    const ColumnSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file: " + path);
  return ingest_dataset(in, schema);
}

}  // namespace bvs
