#include "bvs/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bvs {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_beta(double x, double y) {
  return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y);
}
}  // namespace

PriorFamily prior_family_from_string(const std::string& name) {
  if (name == "pimom" || name == "piMOM" || name == "imom") {
    return PriorFamily::piMOM;
  }
  if (name == "pmom" || name == "pMOM" || name == "mom") {
    return PriorFamily::pMOM;
  }
  throw std::invalid_argument("unknown prior family: " + name);
}

std::string to_string(PriorFamily family) {
  return family == PriorFamily::piMOM ? "pimom" : "pmom";
}

void PriorSpec::validate() const {
  if (tau <= 0.0) throw std::invalid_argument("prior tau must be > 0");
  if (r < 1.0) throw std::invalid_argument("prior r must be >= 1");
  if (family == PriorFamily::pMOM && r != std::floor(r)) {
    throw std::invalid_argument("pMOM requires integer r");
  }
  if (a <= 0.0) throw std::invalid_argument("model prior a must be > 0");
}

double log_pimom(const Eigen::VectorXd& beta, double tau, double r) {
  const double c = 0.5 * r * std::log(tau) - std::lgamma(0.5 * r);
  double total = 0.0;
  for (int i = 0; i < beta.size(); ++i) {
    const double b = beta(i);
    if (b == 0.0) return kNegInf;
    total += c - (r + 1.0) * std::log(std::abs(b)) - tau / (b * b);
  }
  return total;
}

double log_pmom(const Eigen::VectorXd& beta, double tau, double r) {
  const double c = -0.5 * std::log(2.0 * std::numbers::pi) -
                   (r + 0.5) * std::log(tau);
  double total = 0.0;
  for (int i = 0; i < beta.size(); ++i) {
    const double b = beta(i);
    if (b == 0.0) return kNegInf;
    total += c - b * b / (2.0 * tau) + 2.0 * r * std::log(std::abs(b));
  }
  return total;
}

double pimom_pdf(double beta, double tau, double r) {
  if (beta == 0.0) return 0.0;
  Eigen::VectorXd b(1);
  b(0) = beta;
  return std::exp(log_pimom(b, tau, r));
}

double log_prior(const Eigen::VectorXd& beta, const PriorSpec& prior) {
  return prior.family == PriorFamily::piMOM
             ? log_pimom(beta, prior.tau, prior.r)
             : log_pmom(beta, prior.tau, prior.r);
}

void neg_log_prior_grad_hess(const Eigen::VectorXd& beta, const PriorSpec& prior,
                             Eigen::VectorXd& grad, Eigen::VectorXd& hess_diag) {
  const int k = static_cast<int>(beta.size());
  grad.resize(k);
  hess_diag.resize(k);
  const double tau = prior.tau;
  const double r = prior.r;
  for (int i = 0; i < k; ++i) {
    const double b = beta(i);
    if (b == 0.0) throw std::domain_error("prior derivative undefined at beta=0");
    if (prior.family == PriorFamily::piMOM) {
      const double b2 = b * b;
      grad(i) = (r + 1.0) / b - 2.0 * tau / (b2 * b);
      hess_diag(i) = 6.0 * tau / (b2 * b2) - (r + 1.0) / b2;
    } else {
      grad(i) = b / tau - 2.0 * r / b;
      hess_diag(i) = 1.0 / tau + 2.0 * r / (b * b);
    }
  }
}

double log_model_prior(int k_nonfixed, int p_nonfixed, double a, double b) {
  if (k_nonfixed < 0 || k_nonfixed > p_nonfixed) {
    throw std::invalid_argument("log_model_prior: k out of range");
  }
  return log_beta(a + k_nonfixed, b + p_nonfixed - k_nonfixed) - log_beta(a, b);
}

}  // namespace bvs
