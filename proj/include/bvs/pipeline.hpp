#pragma once

#include <optional>
#include <string>

#include "bvs/dataset.hpp"
#include "bvs/hyperparam.hpp"
#include "bvs/search.hpp"

namespace bvs {

// High-level runs driving the full pipeline from a JSON config string.
// All outputs are deterministic given (inputs, seed, config); no timestamps.
//
// Config keys (all optional unless noted):
//   seed, threads
//   prior.family ("pimom" | "pmom"), prior.r, prior.tau, modelprior.a, modelprior.b
//   tune.alpha, tune.reps            (tau tuned when prior.tau is absent/<=0)
//   search.temps_hi/temps_lo/n_temps, search.iters, search.d, search.chains
//   occam_w
//   simulate.case/reps/n/p           (simulate only)
//   evaluate.folds/t_grid/mode/g_weight ("survival" | "censoring")
//   predict.mode ("hppm" | "bma"), predict.subjects_csv
//   report.top_models

struct SelectOutcome {
  std::optional<TauSelection> tau_info;  // present when tau was tuned
  double tau_used = 0.0;
  ModelPool pool;
  SearchSummaries summaries;
  PriorSpec prior;
  SearchConfig search;
};

SelectOutcome run_select(const SurvivalDataset& dataset,
                         const std::string& config_json);

std::string select_report_json(const SurvivalDataset& dataset,
                               const std::string& config_json);
std::string tune_report_csv(const SurvivalDataset& dataset,
                            const std::string& config_json);
std::string simulate_report_csv(const std::string& config_json);
std::string evaluate_report_csv(const SurvivalDataset& dataset,
                                const std::string& config_json);
std::string predict_report_csv(const SurvivalDataset& dataset,
                               const std::string& config_json);

// FNV-1a hash of the canonicalized config, stamped into every report.
std::string config_hash(const std::string& config_json);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bvs
