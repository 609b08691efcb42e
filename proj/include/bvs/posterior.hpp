#pragma once

#include <Eigen/Core>
#include <vector>

#include "bvs/dataset.hpp"
#include "bvs/priors.hpp"

namespace bvs {

// A scored model: MAP coefficients, Laplace log-marginal and model prior.
// log_score = log_marginal + log_model_prior is the unnormalized log
// posterior probability used for search moves and normalization.
struct ScoredModel {
  ModelId model;
  Eigen::VectorXd beta_map;
  double log_marginal = 0.0;
  double log_model_prior = 0.0;
  double log_score = 0.0;
  double hessian_logdet = 0.0;
  bool converged = false;
};

// Value, gradient and Hessian of g(beta) = -loglik(beta) - logprior(beta).
// Returns +inf (with outputs untouched) when beta sits on the prior barrier.
double neg_log_posterior(const Eigen::VectorXd& beta, const Eigen::MatrixXd& Xk,
                         const Eigen::VectorXi& status, const PriorSpec& prior,
                         Eigen::VectorXd* grad = nullptr,
                         Eigen::MatrixXd* hess = nullptr);

struct MapResult {
  Eigen::VectorXd beta;
  double g_value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Quasi-Newton minimization of g, started at the Cox MLE with small
// components nudged off the prior barrier. One perturbed restart on line
// search failure.
MapResult map_estimate(const Eigen::MatrixXd& Xk, const Eigen::VectorXi& status,
                       const PriorSpec& prior);
MapResult map_estimate(const Eigen::MatrixXd& Xk, const Eigen::VectorXi& status,
                       const PriorSpec& prior, const Eigen::VectorXd& init);

// Laplace approximation of the log marginal at the MAP. The model prior uses
// non-fixed counts (k_nonfixed of p_nonfixed). Models whose Hessian is not
// positive definite at the MAP come back with converged=false.
ScoredModel score_model(const SurvivalDataset& dataset, const ModelId& model,
                        const PriorSpec& prior);

// Posterior probabilities over a pool of scored models: exp(log_score - lse).
// Unconverged entries get probability 0. Throws if no converged entry.
std::vector<double> normalize_scores(const std::vector<ScoredModel>& pool);

}  // namespace bvs
