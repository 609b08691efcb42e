#pragma once

#include <Eigen/Core>
#include <string>

namespace bvs {

enum class PriorFamily { piMOM, pMOM };

PriorFamily prior_family_from_string(const std::string& name);
std::string to_string(PriorFamily family);

// Nonlocal coefficient prior plus beta-binomial model-space parameters.
// b <= 0 means "use the default b = p_nonfixed - a" resolved at scoring time.
struct PriorSpec {
  PriorFamily family = PriorFamily::piMOM;
  double r = 1.0;
  double tau = 0.25;
  double a = 1.0;
  double b = -1.0;

  double resolved_b(int p_nonfixed) const {
    return b > 0.0 ? b : static_cast<double>(p_nonfixed) - a;
  }
  void validate() const;
};

// Log density of the selected family at beta; -inf if any component is 0.
double log_prior(const Eigen::VectorXd& beta, const PriorSpec& prior);

// Gradient and (diagonal) Hessian of the NEGATIVE log prior. The Hessian
// diagonal is returned as a vector.
void neg_log_prior_grad_hess(const Eigen::VectorXd& beta, const PriorSpec& prior,
                             Eigen::VectorXd& grad, Eigen::VectorXd& hess_diag);

// Individual families (log densities sum over components; k=0 gives 0).
double log_pimom(const Eigen::VectorXd& beta, double tau, double r);
double log_pmom(const Eigen::VectorXd& beta, double tau, double r);

// Univariate densities, used by the hyperparameter overlap integral.
double pimom_pdf(double beta, double tau, double r);

// log Beta(a + k, b + p - k) - log Beta(a, b); k and p count non-fixed
// covariates only.
double log_model_prior(int k_nonfixed, int p_nonfixed, double a, double b);

}  // namespace bvs
