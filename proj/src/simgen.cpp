#include "bvs/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bvs/rng.hpp"

namespace bvs {

namespace {
enum Purpose : std::uint64_t {
  kDesign = 11,
  kSurvival = 12,
  kCensoring = 13,
  kSigns = 14,
};
}

Eigen::MatrixXd gen_design(int n, int p, double rho, bool special_block,
                           StreamRng& rng) {
  if (n < 1 || p < 1) throw std::invalid_argument("gen_design: n, p must be >= 1");
  if (rho < 0.0 || rho >= 1.0) {
    throw std::invalid_argument("gen_design: rho must be in [0, 1)");
  }
  if (special_block && p < 5) {
    throw std::invalid_argument("gen_design: special block needs p >= 5");
  }
  const double a = std::sqrt(rho);
  const double b = std::sqrt(1.0 - rho);
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    const double z0 = rng.normal();
    double z4 = 0.0;  // idiosyncratic part of column 4 (0-based 3)
    for (int j = 0; j < p; ++j) {
      const double z = rng.normal();
      X(i, j) = a * z0 + b * z;
      if (j == 3) z4 = z;
    }
    // column 5 (0-based 4): equal to column 4's idiosyncratic factor, giving
    // corr(X4, X5) = sqrt(1 - rho) and zero correlation with the rest
    if (special_block) X(i, 4) = z4;
  }
  return X;
}

Eigen::VectorXd gen_survival_exponential(const Eigen::VectorXd& linpred,
                                         double rate, StreamRng& rng) {
  if (rate <= 0.0) throw std::invalid_argument("survival rate must be > 0");
  Eigen::VectorXd t(linpred.size());
  for (int i = 0; i < t.size(); ++i) {
    t(i) = -std::log(rng.uniform()) / (rate * std::exp(linpred(i)));
  }
  return t;
}

Eigen::VectorXd gen_survival_weibull(const Eigen::VectorXd& linpred, double rate,
                                     double shape, StreamRng& rng) {
  if (rate <= 0.0 || shape <= 0.0) {
    throw std::invalid_argument("weibull rate and shape must be > 0");
  }
  Eigen::VectorXd t(linpred.size());
  for (int i = 0; i < t.size(); ++i) {
    const double e = -std::log(rng.uniform()) / (rate * std::exp(linpred(i)));
    t(i) = std::pow(e, 1.0 / shape);
  }
  return t;
}

Eigen::VectorXd gen_censoring_exponential(int n, double rate, StreamRng& rng) {
  Eigen::VectorXd c(n);
  if (rate <= 0.0) {
    c.setConstant(std::numeric_limits<double>::infinity());
    return c;
  }
  for (int i = 0; i < n; ++i) c(i) = rng.exponential(rate);
  return c;
}

Eigen::VectorXd gen_censoring_uniform(int n, double lo, double hi, StreamRng& rng) {
  if (hi <= lo) throw std::invalid_argument("uniform censoring needs hi > lo");
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) c(i) = rng.uniform(lo, hi);
  return c;
}

SimCase sim_case(int id) {
  SimCase sim;
  sim.id = id;
  switch (id) {
    case 1:
      sim.beta_true.resize(5);
      sim.beta_true << -1.5389, 0.6839, -0.8498, -1.2716, -1.1045;
      sim.special_block = true;
      sim.survival = SurvivalDist::Exponential;
      sim.survival_rate = 1.0;
      sim.censoring = CensoringDist::Exponential;
      sim.censoring_a = 0.1;
      break;
    case 2:
      sim.beta_true.resize(6);
      sim.beta_true << 1.1201, 0.8322, -1.9620, -1.7639, 1.6782, 1.8995;
      sim.survival = SurvivalDist::Weibull;
      sim.survival_rate = 0.1;
      sim.weibull_shape = 15.0;
      sim.censoring = CensoringDist::Uniform;
      sim.censoring_a = 0.0;
      sim.censoring_b = 8.0;
      break;
    case 3:
      sim.beta_true.resize(20);
      sim.beta_true << -1.6802, -1.2483, 2.9430, -2.6458, -2.5173, -2.8493,
          -2.0070, -1.5931, 0.8800, -0.9387, 1.6599, -2.9288, -1.2495, -2.6298,
          -2.3434, 1.9075, -1.1044, -0.7873, 2.6722, -0.6340;
      sim.survival = SurvivalDist::Exponential;
      sim.survival_rate = 1.0;
      sim.censoring = CensoringDist::Exponential;
      sim.censoring_a = 0.1;
      break;
    case 4:  // six-covariate variant of case 3
      sim.beta_true.resize(6);
      sim.beta_true << -1.5140, 1.2799, -1.5307, 1.5164, -1.3020, 1.5833;
      sim.survival = SurvivalDist::Exponential;
      sim.survival_rate = 1.0;
      sim.censoring = CensoringDist::Exponential;
      sim.censoring_a = 0.1;
      break;
    case 5:  // prior-contrast design: exponential mean 10, no censoring
      sim.beta_true.resize(6);
      sim.beta_true << 0.5, 0.85, 1.00, 1.50, 1.85, 2.5;
      sim.survival = SurvivalDist::Exponential;
      sim.survival_rate = 0.1;
      sim.censoring = CensoringDist::None;
      sim.random_signs = true;
      break;
    default:
      throw std::invalid_argument("unknown simulation case: " + std::to_string(id));
  }
  return sim;
}

SimReplicate gen_replicate(const SimCase& sim, int n, int p, std::uint64_t seed,
                           int replicate) {
  const int k = static_cast<int>(sim.beta_true.size());
  if (p < k) throw std::invalid_argument("gen_replicate: p smaller than true model");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta.head(k) = sim.beta_true;
  if (sim.random_signs) {
    StreamRng sign_rng(seed, replicate, kSigns);
    for (int j = 0; j < k; ++j) {
      if (sign_rng.uniform() < 0.5) beta(j) = -beta(j);
    }
  }

  StreamRng design_rng(seed, replicate, kDesign);
  Eigen::MatrixXd X = gen_design(n, p, sim.rho, sim.special_block, design_rng);
  const Eigen::VectorXd linpred = X * beta;

  StreamRng surv_rng(seed, replicate, kSurvival);
  Eigen::VectorXd t =
      sim.survival == SurvivalDist::Exponential
          ? gen_survival_exponential(linpred, sim.survival_rate, surv_rng)
          : gen_survival_weibull(linpred, sim.survival_rate, sim.weibull_shape,
                                 surv_rng);

  StreamRng cens_rng(seed, replicate, kCensoring);
  Eigen::VectorXd c;
  switch (sim.censoring) {
    case CensoringDist::Exponential:
      c = gen_censoring_exponential(n, sim.censoring_a, cens_rng);
      break;
    case CensoringDist::Uniform:
      c = gen_censoring_uniform(n, sim.censoring_a, sim.censoring_b, cens_rng);
      break;
    case CensoringDist::None:
      c.setConstant(n, std::numeric_limits<double>::infinity());
      break;
  }

  Eigen::VectorXd y(n);
  Eigen::VectorXi status(n);
  for (int i = 0; i < n; ++i) {
    y(i) = std::min(t(i), c(i));
    status(i) = t(i) <= c(i) ? 1 : 0;
  }

  SimReplicate rep;
  std::vector<std::string> names(p);
  for (int j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);
  rep.dataset = make_dataset(y, status, std::move(X), std::move(names), {});
  rep.beta_true = beta;
  std::vector<int> truth_cols;
  for (int j = 0; j < p; ++j) {
    if (beta(j) != 0.0) truth_cols.push_back(j);
  }
  rep.truth = ModelId(truth_cols);
  rep.censoring_rate = 1.0 - static_cast<double>(status.sum()) / n;
  return rep;
}

SelectionMetrics compute_metrics(const ModelId& selected, const ModelId& truth,
                                 const Eigen::VectorXd& beta_hat_full,
                                 const Eigen::VectorXd& beta_true_full,
                                 const std::vector<int>& fixed_columns) {
  if (beta_hat_full.size() != beta_true_full.size()) {
    throw std::invalid_argument("compute_metrics: coefficient dimension mismatch");
  }
  auto is_fixed = [&](int c) {
    return std::find(fixed_columns.begin(), fixed_columns.end(), c) !=
           fixed_columns.end();
  };
  SelectionMetrics m;
  for (int c : selected.indices()) {
    if (is_fixed(c)) continue;
    ++m.model_size;
    if (truth.contains(c)) {
      ++m.tp;
    } else {
      ++m.fp;
    }
  }
  int truth_size = 0;
  for (int c : truth.indices()) {
    if (!is_fixed(c)) ++truth_size;
  }
  m.exact = (m.fp == 0 && m.tp == truth_size);
  for (int j = 0; j < beta_hat_full.size(); ++j) {
    const double d = beta_hat_full(j) - beta_true_full(j);
    m.l1 += std::abs(d);
    m.sqerr += d * d;
  }
  return m;
}

MetricsAggregate aggregate_metrics(const std::vector<SelectionMetrics>& reps) {
  MetricsAggregate agg;
  agg.replicates = static_cast<int>(reps.size());
  if (reps.empty()) return agg;
  const double m = static_cast<double>(reps.size());
  for (const auto& r : reps) {
    agg.mms += r.model_size;
    agg.mtp += r.tp;
    agg.mfp += r.fp;
    agg.mse += r.sqerr;
    agg.mean_l1 += r.l1;
    agg.tmp += r.exact ? 1.0 : 0.0;
  }
  agg.mms /= m;
  agg.mtp /= m;
  agg.mfp /= m;
  agg.mse /= m;
  agg.mean_l1 /= m;
  agg.tmp /= m;
  if (reps.size() > 1) {
    double v_ms = 0, v_tp = 0, v_fp = 0, v_mse = 0, v_l1 = 0;
    for (const auto& r : reps) {
      v_ms += (r.model_size - agg.mms) * (r.model_size - agg.mms);
      v_tp += (r.tp - agg.mtp) * (r.tp - agg.mtp);
      v_fp += (r.fp - agg.mfp) * (r.fp - agg.mfp);
      v_mse += (r.sqerr - agg.mse) * (r.sqerr - agg.mse);
      v_l1 += (r.l1 - agg.mean_l1) * (r.l1 - agg.mean_l1);
    }
    const double denom = m * (m - 1.0);
    agg.se_mms = std::sqrt(v_ms / denom);
    agg.se_mtp = std::sqrt(v_tp / denom);
    agg.se_mfp = std::sqrt(v_fp / denom);
    agg.se_mse = std::sqrt(v_mse / denom);
    agg.se_l1 = std::sqrt(v_l1 / denom);
  }
  return agg;
}

}  // namespace bvs
