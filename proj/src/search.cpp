#include "bvs/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bvs/cox.hpp"
#include "bvs/rng.hpp"
#include "bvs/threads.hpp"

namespace bvs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum Purpose : std::uint64_t {
  kStartModel = 101,
  kMoves = 102,
};

// Offset partial log-likelihood in a single added column: value, first and
// second derivative at scalar b. One backward pass, running-max shifted.
void utility_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& offset,
                  const Eigen::VectorXi& status, double b, double& value,
                  double& d1, double& d2) {
  const int n = static_cast<int>(x.size());
  double shift = kNegInf;
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  value = 0.0;
  d1 = 0.0;
  d2 = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double e = b * x(i) + offset(i);
    if (e > shift) {
      const double rescale = shift == kNegInf ? 0.0 : std::exp(shift - e);
      s0 *= rescale;
      s1 *= rescale;
      s2 *= rescale;
      shift = e;
    }
    const double w = std::exp(e - shift);
    s0 += w;
    s1 += w * x(i);
    s2 += w * x(i) * x(i);
    if (status(i) == 1) {
      const double mean = s1 / s0;
      value += e - (shift + std::log(s0));
      d1 += x(i) - mean;
      d2 -= s2 / s0 - mean * mean;
    }
  }
}

struct UtilityResult {
  double value;
  bool converged;
};

UtilityResult maximize_utility(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& offset,
                               const Eigen::VectorXi& status) {
  double b = 0.0;
  double value, d1, d2;
  utility_eval(x, offset, status, b, value, d1, d2);
  double best = value;
  for (int iter = 0; iter < 50; ++iter) {
    if (std::abs(d1) < 1e-6) return {best, true};
    if (d2 >= -1e-12) return {best, true};  // flat direction: no information
    double step = -d1 / d2;
    step = std::clamp(step, -10.0, 10.0);
    double v2, g2, h2;
    int halvings = 0;
    for (;;) {
      utility_eval(x, offset, status, b + step, v2, g2, h2);
      if (v2 >= value || ++halvings > 20) break;
      step *= 0.5;
    }
    if (v2 < value) return {best, false};
    b += step;
    value = v2;
    d1 = g2;
    d2 = h2;
    if (value > best) best = value;
    if (std::abs(b) > 50.0) return {best, false};
  }
  return {best, false};
}

Eigen::VectorXd model_offset(const SurvivalDataset& dataset,
                             const ModelId& current,
                             const Eigen::VectorXd& beta_current) {
  if (current.empty()) return Eigen::VectorXd::Zero(dataset.n());
  return dataset.submatrix(current) * beta_current;
}

// top-d candidate columns by conditional utility (ties toward lower index)
std::vector<int> screen_columns(const SurvivalDataset& dataset,
                                const ModelId& current,
                                const Eigen::VectorXd& beta_current, int d) {
  const Eigen::VectorXd offset = model_offset(dataset, current, beta_current);
  std::vector<std::pair<double, int>> utilities;
  utilities.reserve(dataset.p());
  for (int m = 0; m < dataset.p(); ++m) {
    if (current.contains(m)) continue;
    const UtilityResult u =
        maximize_utility(dataset.design.col(m), offset, dataset.status);
    utilities.emplace_back(u.value, m);
  }
  const int take = std::min<int>(d, static_cast<int>(utilities.size()));
  std::partial_sort(utilities.begin(), utilities.begin() + take,
                    utilities.end(), [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<int> cols(take);
  for (int i = 0; i < take; ++i) cols[i] = utilities[i].second;
  return cols;
}

}  // namespace

std::vector<double> SearchConfig::resolved_temperatures() const {
  if (!temperatures.empty()) return temperatures;
  std::vector<double> t(10);
  for (int i = 0; i < 10; ++i) t[i] = 3.0 - 2.0 * i / 9.0;
  return t;
}

int SearchConfig::resolved_d(int p_nonfixed) const {
  if (d > 0) return d;
  const int auto_d = 2 * static_cast<int>(std::ceil(std::log(
                             std::max(2, p_nonfixed))));
  return std::max(1, auto_d);
}

void SearchConfig::validate() const {
  if (iters_per_temp < 1) throw std::invalid_argument("iters_per_temp must be >= 1");
  if (chains < 1) throw std::invalid_argument("chains must be >= 1");
  const auto temps = resolved_temperatures();
  for (std::size_t i = 0; i < temps.size(); ++i) {
    if (temps[i] < 1.0) throw std::invalid_argument("temperatures must be >= 1");
    if (i > 0 && temps[i] > temps[i - 1]) {
      throw std::invalid_argument("temperatures must be descending");
    }
  }
}

void ModelPool::absorb(const ScoredModel& scored, int chain, long visits) {
  auto [it, inserted] = entries.try_emplace(scored.model);
  if (inserted) {
    it->second.scored = scored;
  }
  it->second.visits += visits;
  auto& ch = it->second.chains;
  if (std::find(ch.begin(), ch.end(), chain) == ch.end()) ch.push_back(chain);
}

void ModelPool::merge(const ModelPool& other) {
  for (const auto& [id, entry] : other.entries) {
    auto [it, inserted] = entries.try_emplace(id);
    if (inserted) {
      it->second.scored = entry.scored;
      it->second.visits = entry.visits;
      it->second.chains = entry.chains;
    } else {
      it->second.visits += entry.visits;
      for (int c : entry.chains) {
        auto& ch = it->second.chains;
        if (std::find(ch.begin(), ch.end(), c) == ch.end()) ch.push_back(c);
      }
    }
  }
}

double conditional_utility(int m, const ModelId& current,
                           const SurvivalDataset& dataset,
                           const Eigen::VectorXd& beta_current,
                           bool* converged) {
  if (current.contains(m)) {
    throw std::invalid_argument("conditional_utility: column already in model");
  }
  const Eigen::VectorXd offset = model_offset(dataset, current, beta_current);
  const UtilityResult u =
      maximize_utility(dataset.design.col(m), offset, dataset.status);
  if (converged) *converged = u.converged;
  return u.value;
}

Neighborhoods neighborhoods(const ModelId& current,
                            const SurvivalDataset& dataset,
                            const Eigen::VectorXd& beta_current, int d) {
  Neighborhoods nb;
  for (int m : screen_columns(dataset, current, beta_current, d)) {
    nb.gamma_plus.push_back(current.with(m));
  }
  for (int c : current.indices()) {
    if (!dataset.is_fixed(c)) nb.gamma_minus.push_back(current.without(c));
  }
  return nb;
}

namespace {

class ChainState {
 public:
  ChainState(const SurvivalDataset& dataset, const PriorSpec& prior)
      : dataset_(dataset), prior_(prior) {}

  const ScoredModel& score(const ModelId& model) {
    auto it = memo_.find(model);
    if (it == memo_.end()) {
      it = memo_.emplace(model, score_model(dataset_, model, prior_)).first;
    }
    return it->second;
  }

  const std::vector<int>& screened(const ModelId& model,
                                   const Eigen::VectorXd& beta, int d) {
    auto it = screen_memo_.find(model);
    if (it == screen_memo_.end()) {
      it = screen_memo_.emplace(model, screen_columns(dataset_, model, beta, d))
               .first;
    }
    return it->second;
  }

  const std::map<ModelId, ScoredModel>& scored() const { return memo_; }

 private:
  const SurvivalDataset& dataset_;
  const PriorSpec& prior_;
  std::map<ModelId, ScoredModel> memo_;
  std::map<ModelId, std::vector<int>> screen_memo_;
};

}  // namespace

ModelPool s5_chain(const SurvivalDataset& dataset, const PriorSpec& prior,
                   const SearchConfig& config, const ModelId& start,
                   std::uint64_t chain_index) {
  config.validate();
  for (int c : dataset.fixed_columns) {
    if (!start.contains(c)) {
      throw std::invalid_argument("s5_chain: start model must contain fixed columns");
    }
  }
  const int d = config.resolved_d(dataset.n_nonfixed());
  const auto temps = config.resolved_temperatures();
  StreamRng move_rng(config.seed ^ chain_index, chain_index, kMoves);

  ChainState state(dataset, prior);
  ModelPool visit_counts;  // visit bookkeeping only; scores merged at the end

  ModelId current = start;
  ScoredModel current_scored = state.score(current);
  long stalls = 0;

  std::vector<const ScoredModel*> choices;
  std::vector<double> weights;
  for (double t : temps) {
    for (int it = 0; it < config.iters_per_temp; ++it) {
      choices.clear();
      choices.push_back(&current_scored);

      const auto& added = state.screened(current, current_scored.beta_map, d);
      for (int m : added) choices.push_back(&state.score(current.with(m)));
      for (int c : current.indices()) {
        if (!dataset.is_fixed(c)) {
          choices.push_back(&state.score(current.without(c)));
        }
      }

      double max_score = kNegInf;
      for (const ScoredModel* sm : choices) {
        if (sm->converged && sm->log_score > max_score) max_score = sm->log_score;
      }
      if (!std::isfinite(max_score)) {
        ++stalls;  // nothing scorable, stay put
        visit_counts.absorb(current_scored, static_cast<int>(chain_index), 1);
        continue;
      }
      weights.clear();
      double total = 0.0;
      for (const ScoredModel* sm : choices) {
        const double w = sm->converged
                             ? std::exp((sm->log_score - max_score) / t)
                             : 0.0;
        weights.push_back(w);
        total += w;
      }
      double u = move_rng.uniform() * total;
      std::size_t pick = 0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u <= 0.0) {
          pick = i;
          break;
        }
      }
      current_scored = *choices[pick];
      current = current_scored.model;
      visit_counts.absorb(current_scored, static_cast<int>(chain_index), 1);
    }
  }

  ModelPool pool;
  for (const auto& [id, scored] : state.scored()) {
    pool.absorb(scored, static_cast<int>(chain_index), 0);
  }
  pool.merge(visit_counts);
  (void)stalls;
  return pool;
}

ModelPool run_search(const SurvivalDataset& dataset, const PriorSpec& prior,
                     const SearchConfig& config) {
  config.validate();
  prior.validate();
  const ModelId fixed = dataset.fixed_model();

  std::vector<ModelId> starts(config.chains);
  for (int c = 0; c < config.chains; ++c) {
    if (!config.start_models.empty()) {
      starts[c] = config.start_models[c % config.start_models.size()];
    } else if (dataset.n_nonfixed() > 0) {
      StreamRng rng(config.seed ^ static_cast<std::uint64_t>(c), c, kStartModel);
      int pick = static_cast<int>(rng.below(dataset.n_nonfixed()));
      int col = -1;
      for (int j = 0; j < dataset.p(); ++j) {
        if (!dataset.is_fixed(j) && pick-- == 0) {
          col = j;
          break;
        }
      }
      starts[c] = fixed.with(col);
    } else {
      starts[c] = fixed;
    }
  }

  std::vector<ModelPool> pools(config.chains);
  parallel_for(config.chains, config.threads, [&](int c) {
    pools[c] = s5_chain(dataset, prior, config, starts[c],
                        static_cast<std::uint64_t>(c));
  });

  ModelPool merged;
  for (const auto& pool : pools) merged.merge(pool);
  return merged;
}

SearchSummaries summarize(const ModelPool& pool, const SurvivalDataset& dataset,
                          double occam_w) {
  std::vector<const PoolEntry*> entries;
  entries.reserve(pool.size());
  std::vector<ScoredModel> scored;
  scored.reserve(pool.size());
  for (const auto& [id, entry] : pool.entries) {
    entries.push_back(&entry);
    scored.push_back(entry.scored);
  }
  const std::vector<double> probs = normalize_scores(scored);

  SearchSummaries out;
  int best = -1;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (!scored[i].converged) continue;
    if (best < 0 || scored[i].log_score > scored[best].log_score) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw std::invalid_argument("summarize: no converged model");
  out.hppm = scored[best].model;
  out.hppm_posterior = probs[best];
  out.hppm_log_score = scored[best].log_score;

  out.inclusion_probs.assign(dataset.p(), 0.0);
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (probs[i] == 0.0) continue;
    for (int c : scored[i].model.indices()) out.inclusion_probs[c] += probs[i];
  }
  std::vector<int> mpm_cols;
  for (int c = 0; c < dataset.p(); ++c) {
    if (out.inclusion_probs[c] >= 0.5) mpm_cols.push_back(c);
  }
  out.mpm = ModelId(mpm_cols);

  const double cutoff = scored[best].log_score + std::log(occam_w);
  double occam_total = 0.0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].converged && scored[i].log_score >= cutoff) {
      out.occam.emplace_back(scored[i].model, probs[i]);
      occam_total += probs[i];
    }
  }
  for (auto& [id, w] : out.occam) w /= occam_total;

  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].converged) out.ranked.emplace_back(scored[i].model, probs[i]);
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

}  // namespace bvs
