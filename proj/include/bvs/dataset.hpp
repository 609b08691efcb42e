#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace bvs {

// Sorted set of selected column indices (0-based). Always a superset of the
// dataset's fixed columns; the identity key for memoization and pooling.
class ModelId {
 public:
  ModelId() = default;
  explicit ModelId(std::vector<int> indices);

  const std::vector<int>& indices() const { return idx_; }
  int size() const { return static_cast<int>(idx_.size()); }
  bool empty() const { return idx_.empty(); }
  bool contains(int column) const;

  ModelId with(int column) const;     // add one column
  ModelId without(int column) const;  // drop one column

  bool operator==(const ModelId& other) const { return idx_ == other.idx_; }
  bool operator<(const ModelId& other) const { return idx_ < other.idx_; }

  std::string to_string() const;

 private:
  std::vector<int> idx_;  // strictly increasing
};

struct ColumnSchema {
  std::string time_col;
  std::string status_col;
  std::vector<std::string> fixed_cols;
  bool standardize = false;  // center/scale non-fixed columns
};

// Validated survival data: times ascending, status/design co-permuted.
// Immutable after construction; safe to share across threads.
struct SurvivalDataset {
  Eigen::VectorXd times;
  Eigen::VectorXi status;  // 1 = event, 0 = censored
  Eigen::MatrixXd design;  // n x p
  std::vector<std::string> column_names;
  std::vector<int> fixed_columns;    // sorted, 0-based
  std::vector<int> sort_permutation; // row i came from input row perm[i]
  std::vector<double> scale_center;  // per column; empty unless standardized
  std::vector<double> scale_factor;
  bool had_ties = false;
  std::vector<std::string> warnings;

  int n() const { return static_cast<int>(times.size()); }
  int p() const { return static_cast<int>(design.cols()); }
  int n_nonfixed() const { return p() - static_cast<int>(fixed_columns.size()); }
  bool is_fixed(int column) const;
  int n_events() const { return status.sum(); }
  double censoring_fraction() const {
    return 1.0 - static_cast<double>(n_events()) / n();
  }

  ModelId fixed_model() const { return ModelId(fixed_columns); }

  // Columns of the design in model-index order (n x |model|).
  Eigen::MatrixXd submatrix(const ModelId& model) const;
};

// Thrown on malformed input; carries row/column diagnostics in what().
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse a delimited text stream (comma or tab, header row required) into a
// validated, time-sorted dataset. Categorical fixed covariates are expanded
// to reference-coded indicator columns; non-fixed columns must be numeric.
SurvivalDataset ingest_dataset(std::istream& source, const ColumnSchema& schema);
SurvivalDataset ingest_dataset_file(const std::string& path, const ColumnSchema& schema);

// Construct directly from arrays (already numeric); applies the same
// validation and time sorting as ingest_dataset.
SurvivalDataset make_dataset(Eigen::VectorXd times, Eigen::VectorXi status,
                             Eigen::MatrixXd design,
                             std::vector<std::string> column_names,
                             std::vector<int> fixed_columns,
                             bool standardize = false);

// Stable sort by (time asc, events before censorings at ties). Idempotent.
SurvivalDataset sort_by_time(const SurvivalDataset& dataset);

}  // namespace bvs
