#include "bvs/posterior.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bvs/cox.hpp"
#include "bvs/lbfgs.hpp"

namespace bvs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double neg_log_posterior(const Eigen::VectorXd& beta, const Eigen::MatrixXd& Xk,
                         const Eigen::VectorXi& status, const PriorSpec& prior,
                         Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
  for (int i = 0; i < beta.size(); ++i) {
    if (beta(i) == 0.0) return kInf;
  }
  const double lp = log_prior(beta, prior);
  if (!std::isfinite(lp)) return kInf;

  Eigen::VectorXd cox_grad;
  Eigen::MatrixXd cox_hess;
  const double ll = cox_eval(Xk, beta, status, grad ? &cox_grad : nullptr,
                             hess ? &cox_hess : nullptr);

  if (grad || hess) {
    Eigen::VectorXd pg, ph;
    neg_log_prior_grad_hess(beta, prior, pg, ph);
    if (grad) *grad = cox_grad + pg;
    if (hess) {
      *hess = cox_hess;
      hess->diagonal() += ph;
    }
  }
  return -ll - lp;
}

namespace {

Eigen::VectorXd nudged_init(const Eigen::VectorXd& mle) {
  Eigen::VectorXd init = mle;
  for (int i = 0; i < init.size(); ++i) {
    if (std::abs(init(i)) < 1e-3) {
      init(i) = (init(i) >= 0.0 ? 1.0 : -1.0) * 1e-3;
    }
  }
  return init;
}

MapResult run_lbfgs(const Eigen::MatrixXd& Xk, const Eigen::VectorXi& status,
                    const PriorSpec& prior, const Eigen::VectorXd& init) {
  ObjectiveFn fg = [&](const Eigen::VectorXd& b, Eigen::VectorXd& g) {
    Eigen::VectorXd grad;
    const double f = neg_log_posterior(b, Xk, status, prior, &grad);
    if (std::isfinite(f)) {
      g = grad;
    } else {
      g.setZero(b.size());
    }
    return f;
  };
  LbfgsOptions opts;
  opts.memory = 10;
  opts.max_iterations = 500;
  opts.grad_tol = 1e-5;
  LbfgsResult r = lbfgs_minimize(fg, init, opts);
  MapResult out;
  out.beta = r.x;
  out.g_value = r.f;
  out.converged = r.converged;
  out.iterations = r.iterations;
  return out;
}

}  // namespace

MapResult map_estimate(const Eigen::MatrixXd& Xk, const Eigen::VectorXi& status,
                       const PriorSpec& prior, const Eigen::VectorXd& init) {
  MapResult r = run_lbfgs(Xk, status, prior, nudged_init(init));
  if (!r.converged) {
    // restart once from the init perturbed off the barrier scale
    Eigen::VectorXd jittered = nudged_init(init);
    const double bump = 1e-3 * std::sqrt(prior.tau);
    for (int i = 0; i < jittered.size(); ++i) {
      jittered(i) += (jittered(i) >= 0.0 ? bump : -bump);
    }
    MapResult r2 = run_lbfgs(Xk, status, prior, jittered);
    if (r2.converged || r2.g_value < r.g_value) return r2;
  }
  return r;
}

MapResult map_estimate(const Eigen::MatrixXd& Xk, const Eigen::VectorXi& status,
                       const PriorSpec& prior) {
  const CoxMleResult mle = cox_mle(Xk, status);
  return map_estimate(Xk, status, prior, mle.beta);
}

ScoredModel score_model(const SurvivalDataset& dataset, const ModelId& model,
                        const PriorSpec& prior) {
  ScoredModel sm;
  sm.model = model;
  const int k = model.size();
  const int p_nonfixed = dataset.n_nonfixed();
  int k_nonfixed = 0;
  for (int c : model.indices()) {
    if (!dataset.is_fixed(c)) ++k_nonfixed;
  }
  sm.log_model_prior = log_model_prior(k_nonfixed, p_nonfixed, prior.a,
                                       prior.resolved_b(p_nonfixed));

  if (k == 0) {
    // empty model: the marginal is the covariate-free partial likelihood
    sm.beta_map.resize(0);
    sm.log_marginal = partial_loglik(Eigen::MatrixXd(dataset.n(), 0),
                                     Eigen::VectorXd(), dataset.status);
    sm.log_score = sm.log_marginal + sm.log_model_prior;
    sm.converged = true;
    return sm;
  }

  const Eigen::MatrixXd Xk = dataset.submatrix(model);
  const MapResult map = map_estimate(Xk, dataset.status, prior);
  sm.beta_map = map.beta;
  if (!map.converged) {
    sm.log_score = -kInf;
    return sm;
  }

  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  const double g = neg_log_posterior(map.beta, Xk, dataset.status, prior,
                                     &grad, &hess);
  Eigen::LLT<Eigen::MatrixXd> llt(hess);
  if (!std::isfinite(g) || llt.info() != Eigen::Success) {
    sm.log_score = -kInf;  // Laplace approximation invalid here
    return sm;
  }
  double logdet = 0.0;
  for (int i = 0; i < k; ++i) logdet += std::log(llt.matrixLLT()(i, i));
  logdet *= 2.0;

  sm.hessian_logdet = logdet;
  sm.log_marginal =
      -g + 0.5 * k * std::log(2.0 * std::numbers::pi) - 0.5 * logdet;
  sm.log_score = sm.log_marginal + sm.log_model_prior;
  sm.converged = true;
  return sm;
}

std::vector<double> normalize_scores(const std::vector<ScoredModel>& pool) {
  if (pool.empty()) throw std::invalid_argument("normalize_scores: empty pool");
  double max_score = -kInf;
  for (const auto& sm : pool) {
    if (sm.converged && sm.log_score > max_score) max_score = sm.log_score;
  }
  if (!std::isfinite(max_score)) {
    throw std::invalid_argument("normalize_scores: no converged model in pool");
  }
  double lse = 0.0;
  for (const auto& sm : pool) {
    if (sm.converged) lse += std::exp(sm.log_score - max_score);
  }
  lse = max_score + std::log(lse);

  std::vector<double> probs(pool.size(), 0.0);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].converged) probs[i] = std::exp(pool[i].log_score - lse);
  }
  return probs;
}

}  // namespace bvs
