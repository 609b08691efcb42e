#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "bvs/dataset.hpp"
#include "bvs/posterior.hpp"

namespace bvs {

struct SearchConfig {
  std::vector<double> temperatures;  // descending; empty = 10 from 3 to 1
  int iters_per_temp = 30;
  int d = 0;                         // screening-set size; 0 = 2*ceil(log p)
  int chains = 1;
  std::uint64_t seed = 0;
  std::vector<ModelId> start_models;  // optional; cycled over chains
  int threads = 1;

  std::vector<double> resolved_temperatures() const;
  int resolved_d(int p_nonfixed) const;
  void validate() const;
};

struct PoolEntry {
  ScoredModel scored;
  long visits = 0;                // iterations spent at this model
  std::vector<int> chains;        // chains that scored it
};

// Deduplicated visited-model set; the unit merged across chains. Scores are
// deterministic per model, so merging keeps the first and sums provenance.
struct ModelPool {
  std::map<ModelId, PoolEntry> entries;

  void absorb(const ScoredModel& scored, int chain, long visits = 0);
  void merge(const ModelPool& other);
  std::size_t size() const { return entries.size(); }
};

// Maximized partial log-likelihood of adding column m to `current` with the
// current coefficients frozen; safeguarded 1-D Newton (<= 50 iterations).
double conditional_utility(int m, const ModelId& current,
                           const SurvivalDataset& dataset,
                           const Eigen::VectorXd& beta_current,
                           bool* converged = nullptr);

struct Neighborhoods {
  std::vector<ModelId> gamma_plus;   // current + one screened column
  std::vector<ModelId> gamma_minus;  // current minus one non-fixed column
};

// Addition set from the d highest-utility columns, deletion set from
// dropping each non-fixed member. Fixed covariates are never removable.
Neighborhoods neighborhoods(const ModelId& current,
                            const SurvivalDataset& dataset,
                            const Eigen::VectorXd& beta_current, int d);

// One annealed chain: per temperature, iters_per_temp moves sampled over
// {current} + gamma_plus + gamma_minus with probability proportional to
// exp(log_score / t). Every scored model enters the pool.
ModelPool s5_chain(const SurvivalDataset& dataset, const PriorSpec& prior,
                   const SearchConfig& config, const ModelId& start,
                   std::uint64_t chain_index);

// Independent chains with per-chain derived seeds and random singleton
// starts, merged in chain order; result independent of thread scheduling.
ModelPool run_search(const SurvivalDataset& dataset, const PriorSpec& prior,
                     const SearchConfig& config);

struct SearchSummaries {
  ModelId hppm;
  ModelId mpm;
  double hppm_posterior = 0.0;
  double hppm_log_score = 0.0;
  std::vector<double> inclusion_probs;                 // per column
  std::vector<std::pair<ModelId, double>> occam;       // renormalized weights
  std::vector<std::pair<ModelId, double>> ranked;      // all converged, prob desc
};

// HPPM, MPM (inclusion probability >= 0.5), per-covariate inclusion
// probabilities and Occam's-window weights (w * p(HPPM) cutoff).
SearchSummaries summarize(const ModelPool& pool, const SurvivalDataset& dataset,
                          double occam_w = 0.01);

}  // namespace bvs
