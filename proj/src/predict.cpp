#include "bvs/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "bvs/rng.hpp"

namespace bvs {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return initial;
  return values[static_cast<std::size_t>(it - knots.begin()) - 1];
}

StepFunction kaplan_meier(const Eigen::VectorXd& times,
                          const Eigen::VectorXi& status) {
  const int n = static_cast<int>(times.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return times(a) < times(b); });

  StepFunction s;
  s.initial = 1.0;
  double surv = 1.0;
  int at_risk = n;
  int i = 0;
  while (i < n) {
    const double t = times(order[i]);
    int deaths = 0, leaving = 0;
    while (i < n && times(order[i]) == t) {
      deaths += status(order[i]);
      ++leaving;
      ++i;
    }
    if (deaths > 0) {
      surv *= 1.0 - static_cast<double>(deaths) / at_risk;
      s.knots.push_back(t);
      s.values.push_back(surv);
    }
    at_risk -= leaving;
  }
  return s;
}

double g_interpolate(const StepFunction& G, const std::vector<double>& train_times,
                     double t) {
  if (train_times.empty()) {
    throw std::invalid_argument("g_interpolate: no training times");
  }
  auto it = std::lower_bound(train_times.begin(), train_times.end(), t);
  double nearest;
  if (it == train_times.begin()) {
    nearest = *it;
  } else if (it == train_times.end()) {
    nearest = train_times.back();
  } else {
    const double hi = *it;
    const double lo = *(it - 1);
    nearest = (t - lo <= hi - t) ? lo : hi;  // tie toward the smaller time
  }
  return G(nearest);
}

double sensitivity(double t, double c, const Eigen::VectorXd& marker,
                   const Eigen::VectorXd& times, const Eigen::VectorXi& status,
                   const Eigen::VectorXd& g_at_times) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < times.size(); ++i) {
    if (status(i) != 1 || times(i) > t) continue;
    const double g = g_at_times(i);
    if (g <= 0.0) continue;
    den += 1.0 / g;
    if (marker(i) > c) num += 1.0 / g;
  }
  return den > 0.0 ? num / den : kNaN;
}

double specificity(double t, double c, const Eigen::VectorXd& marker,
                   const Eigen::VectorXd& times) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < times.size(); ++i) {
    if (times(i) <= t) continue;
    den += 1.0;
    if (marker(i) <= c) num += 1.0;
  }
  return den > 0.0 ? num / den : kNaN;
}

std::vector<double> auc_curve(const std::vector<double>& t_grid,
                              const AucInput& input) {
  const std::size_t n_models = input.markers.size();
  if (n_models == 0 || n_models != input.weights.size()) {
    throw std::invalid_argument("auc_curve: model/weight mismatch");
  }

  // threshold sweep over the union of marker values, descending
  std::set<double> cuts;
  for (const auto& m : input.markers) {
    for (int i = 0; i < m.size(); ++i) cuts.insert(m(i));
  }
  std::vector<double> thresholds(cuts.rbegin(), cuts.rend());

  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    // ROC from (0,0) at c=+inf to (1,1) at c=-inf
    double auc = 0.0;
    double prev_x = 0.0, prev_y = 0.0;
    bool valid = true;
    for (double c : thresholds) {
      double se = 0.0, sp = 0.0;
      for (std::size_t j = 0; j < n_models; ++j) {
        const double se_j = sensitivity(t, c, input.markers[j], input.test_times,
                                        input.test_status, input.g_at_test_times);
        const double sp_j =
            specificity(t, c, input.markers[j], input.test_times);
        if (std::isnan(se_j) || std::isnan(sp_j)) {
          valid = false;
          break;
        }
        se += input.weights[j] * se_j;
        sp += input.weights[j] * sp_j;
      }
      if (!valid) break;
      const double x = 1.0 - sp;
      auc += 0.5 * (x - prev_x) * (se + prev_y);
      prev_x = x;
      prev_y = se;
    }
    if (!valid) {
      out.push_back(kNaN);
      continue;
    }
    auc += 0.5 * (1.0 - prev_x) * (1.0 + prev_y);
    out.push_back(auc);
  }
  return out;
}

StepFunction breslow(const SurvivalDataset& dataset, const ModelId& model,
                     const Eigen::VectorXd& beta) {
  const int n = dataset.n();
  const Eigen::MatrixXd Xk = dataset.submatrix(model);
  Eigen::VectorXd linpred =
      model.empty() ? Eigen::VectorXd::Zero(n) : Eigen::VectorXd(Xk * beta);

  // suffix log-sum-exp of the linear predictor
  Eigen::VectorXd log_psi(n);
  double shift = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double e = linpred(i);
    if (e > shift) {
      sum *= shift == -std::numeric_limits<double>::infinity()
                 ? 0.0
                 : std::exp(shift - e);
      shift = e;
    }
    sum += std::exp(e - shift);
    log_psi(i) = shift + std::log(sum);
  }

  StepFunction h;
  h.initial = 0.0;
  double cum = 0.0;
  int i = 0;
  while (i < n) {
    const double t = dataset.times(i);
    double inc = 0.0;
    while (i < n && dataset.times(i) == t) {
      if (dataset.status(i) == 1) inc += std::exp(-log_psi(i));
      ++i;
    }
    if (inc > 0.0) {
      cum += inc;
      h.knots.push_back(t);
      h.values.push_back(cum);
    }
  }
  return h;
}

std::vector<StepFunction> survival_curves(
    const SurvivalDataset& train,
    const std::vector<std::pair<ScoredModel, double>>& weighted_models,
    const Eigen::MatrixXd& subjects) {
  if (weighted_models.empty()) {
    throw std::invalid_argument("survival_curves: no models given");
  }
  if (subjects.cols() != train.p()) {
    throw std::invalid_argument("survival_curves: subject rows must have all columns");
  }
  for (const auto& [sm, w] : weighted_models) {
    if (!sm.converged) {
      throw std::invalid_argument("survival_curves: unscored model in window");
    }
  }

  // baseline hazard per model, knots pooled across models
  std::vector<StepFunction> hazards;
  std::set<double> knot_set;
  for (const auto& [sm, w] : weighted_models) {
    hazards.push_back(breslow(train, sm.model, sm.beta_map));
    for (double t : hazards.back().knots) knot_set.insert(t);
  }
  const std::vector<double> knots(knot_set.begin(), knot_set.end());

  const int n_sub = static_cast<int>(subjects.rows());
  std::vector<StepFunction> curves(n_sub);
  for (int s = 0; s < n_sub; ++s) {
    curves[s].initial = 1.0;
    curves[s].knots = knots;
    curves[s].values.assign(knots.size(), 0.0);
  }

  for (std::size_t j = 0; j < weighted_models.size(); ++j) {
    const auto& [sm, weight] = weighted_models[j];
    Eigen::VectorXd risk(n_sub);
    for (int s = 0; s < n_sub; ++s) {
      double lp = 0.0;
      int idx = 0;
      for (int c : sm.model.indices()) lp += subjects(s, c) * sm.beta_map(idx++);
      risk(s) = std::exp(lp);
    }
    for (std::size_t ki = 0; ki < knots.size(); ++ki) {
      const double h0 = hazards[j](knots[ki]);
      for (int s = 0; s < n_sub; ++s) {
        curves[s].values[ki] += weight * std::exp(-h0 * risk(s));
      }
    }
  }
  return curves;
}

CvFolds cv_folds(const SurvivalDataset& dataset, int k_folds, std::uint64_t seed) {
  if (k_folds < 2) throw std::invalid_argument("cv_folds: k_folds must be >= 2");
  CvFolds out;
  out.assignment.assign(dataset.n(), -1);

  std::vector<int> events, censored;
  for (int i = 0; i < dataset.n(); ++i) {
    (dataset.status(i) == 1 ? events : censored).push_back(i);
  }
  if (k_folds > static_cast<int>(events.size())) {
    out.warnings.push_back("fold count exceeds event count; some folds have no events");
  }
  if (k_folds == dataset.n()) {
    out.warnings.push_back("k_folds equals n: leave-one-out folds are degenerate");
  }

  StreamRng rng(seed, 0, 7);
  rng.shuffle(events);
  rng.shuffle(censored);
  for (std::size_t i = 0; i < events.size(); ++i) {
    out.assignment[events[i]] = static_cast<int>(i % k_folds);
  }
  for (std::size_t i = 0; i < censored.size(); ++i) {
    out.assignment[censored[i]] = static_cast<int>(i % k_folds);
  }
  return out;
}

}  // namespace bvs
