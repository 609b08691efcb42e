#include "survbvs.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "bvs/dataset.hpp"
#include "bvs/pipeline.hpp"

struct survbvs_dataset {
  bvs::SurvivalDataset data;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Maps exceptions onto status codes: validation problems (bad data, bad
// config) vs numerical failures.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return SURVBVS_OK;
  } catch (const bvs::ValidationError& e) {
    g_last_error = e.what();
    return SURVBVS_ERR_VALIDATION;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return SURVBVS_ERR_VALIDATION;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SURVBVS_ERR_NUMERIC;
  } catch (...) {
    g_last_error = "unknown error";
    return SURVBVS_ERR_NUMERIC;
  }
}

std::vector<std::string> split_csv_list(const char* s) {
  std::vector<std::string> out;
  if (!s) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    std::size_t b = item.find_last_not_of(" \t");
    out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

}  // namespace

extern "C" {

const char* survbvs_version(void) { return bvs::kVersion; }

const char* survbvs_last_error(void) { return g_last_error.c_str(); }

int survbvs_dataset_read_csv(const char* path, const char* time_col,
                             const char* status_col, const char* fixed_cols,
                             int standardize, survbvs_dataset** out) {
  if (!path || !time_col || !status_col || !out) {
    g_last_error = "null argument";
    return SURVBVS_ERR_VALIDATION;
  }
  *out = nullptr;
  return guarded([&] {
    bvs::ColumnSchema schema;
    schema.time_col = time_col;
    schema.status_col = status_col;
    schema.fixed_cols = split_csv_list(fixed_cols);
    schema.standardize = standardize != 0;
    auto* handle = new survbvs_dataset{bvs::ingest_dataset_file(path, schema)};
    *out = handle;
  });
}

int survbvs_dataset_from_arrays(int n, int p, const double* times,
                                const int* status, const double* design,
                                const char* const* column_names,
                                const int* fixed_cols, int n_fixed,
                                int standardize, survbvs_dataset** out) {
  if (!times || !status || !design || !out || n < 1 || p < 1) {
    g_last_error = "null argument or empty dimensions";
    return SURVBVS_ERR_VALIDATION;
  }
  *out = nullptr;
  return guarded([&] {
    Eigen::VectorXd t(n);
    Eigen::VectorXi s(n);
    Eigen::MatrixXd x(n, p);
    for (int i = 0; i < n; ++i) {
      t(i) = times[i];
      s(i) = status[i];
      for (int j = 0; j < p; ++j) x(i, j) = design[static_cast<long>(i) * p + j];
    }
    std::vector<std::string> names(p);
    for (int j = 0; j < p; ++j) {
      names[j] = column_names && column_names[j] ? column_names[j]
                                                 : "x" + std::to_string(j + 1);
    }
    std::vector<int> fixed;
    for (int i = 0; i < n_fixed; ++i) fixed.push_back(fixed_cols[i]);
    auto* handle = new survbvs_dataset{
        bvs::make_dataset(std::move(t), std::move(s), std::move(x),
                          std::move(names), std::move(fixed), standardize != 0)};
    *out = handle;
  });
}

int survbvs_dataset_n(const survbvs_dataset* ds) { return ds ? ds->data.n() : 0; }
int survbvs_dataset_p(const survbvs_dataset* ds) { return ds ? ds->data.p() : 0; }
int survbvs_dataset_n_events(const survbvs_dataset* ds) {
  return ds ? ds->data.n_events() : 0;
}

void survbvs_dataset_free(survbvs_dataset* ds) { delete ds; }

namespace {

int run_report(const survbvs_dataset* ds, const char* config_json, char** out,
               std::string (*fn)(const bvs::SurvivalDataset&, const std::string&)) {
  if (!ds || !out) {
    g_last_error = "null argument";
    return SURVBVS_ERR_VALIDATION;
  }
  *out = nullptr;
  return guarded([&] {
    const std::string report = fn(ds->data, config_json ? config_json : "");
    *out = dup_string(report);
    if (!*out) throw std::bad_alloc();
  });
}

}  // namespace

int survbvs_select(const survbvs_dataset* ds, const char* config_json,
                   char** out) {
  return run_report(ds, config_json, out, bvs::select_report_json);
}

int survbvs_tune(const survbvs_dataset* ds, const char* config_json, char** out) {
  return run_report(ds, config_json, out, bvs::tune_report_csv);
}

int survbvs_simulate(const char* config_json, char** out) {
  if (!out) {
    g_last_error = "null argument";
    return SURVBVS_ERR_VALIDATION;
  }
  *out = nullptr;
  return guarded([&] {
    const std::string report =
        bvs::simulate_report_csv(config_json ? config_json : "");
    *out = dup_string(report);
    if (!*out) throw std::bad_alloc();
  });
}

int survbvs_evaluate(const survbvs_dataset* ds, const char* config_json,
                     char** out) {
  return run_report(ds, config_json, out, bvs::evaluate_report_csv);
}

int survbvs_predict(const survbvs_dataset* ds, const char* config_json,
                    char** out) {
  return run_report(ds, config_json, out, bvs::predict_report_csv);
}

void survbvs_free_string(char* s) { std::free(s); }

}  // extern "C"
