#include "bvs/cox.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bvs {

double cox_eval(const Eigen::MatrixXd& Xk, const Eigen::VectorXd& beta,
                const Eigen::VectorXi& status, Eigen::VectorXd* neg_grad,
                Eigen::MatrixXd* neg_hess, CoxWorkspace* ws) {
  const int n = static_cast<int>(Xk.rows());
  const int k = static_cast<int>(Xk.cols());
  if (beta.size() != k) throw std::invalid_argument("cox_eval: beta size != k");
  if (status.size() != n) throw std::invalid_argument("cox_eval: status size != n");
  for (int j = 0; j < k; ++j) {
    if (!std::isfinite(beta(j)))
      throw std::invalid_argument("cox_eval: non-finite beta");
  }

  Eigen::VectorXd linpred = k > 0 ? Eigen::VectorXd(Xk * beta)
                                  : Eigen::VectorXd::Zero(n);

  if (neg_grad) neg_grad->setZero(k);
  if (neg_hess) neg_hess->setZero(k, k);
  if (ws) {
    ws->linpred = linpred;
    ws->log_psi.resize(n);
    ws->xstar.resize(k, n);
  }

  // Backward pass over rows. Accumulators are kept relative to the running
  // suffix maximum of the linear predictor; when the maximum moves, they are
  // rescaled by exp(old - new) <= 1, so nothing can overflow.
  double shift = -std::numeric_limits<double>::infinity();
  double sum_eta = 0.0;                         // sum exp(e_j - shift)
  Eigen::VectorXd sum_x = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd sum_xx;
  if (neg_hess) sum_xx = Eigen::MatrixXd::Zero(k, k);

  double loglik = 0.0;
  Eigen::VectorXd xbar(k);
  for (int i = n - 1; i >= 0; --i) {
    const double e = linpred(i);
    if (e > shift) {
      const double rescale = shift == -std::numeric_limits<double>::infinity()
                                 ? 0.0
                                 : std::exp(shift - e);
      sum_eta *= rescale;
      if (k > 0) sum_x *= rescale;
      if (neg_hess) sum_xx *= rescale;
      shift = e;
    }
    const double w = std::exp(e - shift);
    sum_eta += w;
    if (k > 0) {
      sum_x.noalias() += w * Xk.row(i).transpose();
      if (neg_hess) {
        sum_xx.noalias() += w * Xk.row(i).transpose() * Xk.row(i);
      }
    }
    const double log_psi = shift + std::log(sum_eta);
    if (ws) {
      ws->log_psi(i) = log_psi;
      if (k > 0) ws->xstar.col(i) = sum_x / sum_eta;
    }
    if (status(i) == 1) {
      loglik += e - log_psi;
      if (k > 0 && (neg_grad || neg_hess)) {
        xbar = sum_x / sum_eta;
        if (neg_grad) *neg_grad += xbar - Xk.row(i).transpose();
        if (neg_hess) {
          neg_hess->noalias() += sum_xx / sum_eta;
          neg_hess->noalias() -= xbar * xbar.transpose();
        }
      }
    }
  }
  return loglik;
}

double partial_loglik(const Eigen::MatrixXd& Xk, const Eigen::VectorXd& beta,
                      const Eigen::VectorXi& status) {
  return cox_eval(Xk, beta, status, nullptr, nullptr);
}

Eigen::VectorXd neg_gradient(const Eigen::MatrixXd& Xk,
                             const Eigen::VectorXd& beta,
                             const Eigen::VectorXi& status) {
  Eigen::VectorXd g;
  cox_eval(Xk, beta, status, &g, nullptr);
  return g;
}

Eigen::MatrixXd neg_hessian(const Eigen::MatrixXd& Xk,
                            const Eigen::VectorXd& beta,
                            const Eigen::VectorXi& status) {
  Eigen::MatrixXd h;
  cox_eval(Xk, beta, status, nullptr, &h);
  return h;
}

CoxMleResult cox_mle(const Eigen::MatrixXd& Xk, const Eigen::VectorXi& status,
                     const Eigen::VectorXd& init, int max_iter) {
  const int k = static_cast<int>(Xk.cols());
  CoxMleResult res;
  res.beta = init;
  if (k == 0) {
    res.loglik = partial_loglik(Xk, res.beta, status);
    res.converged = true;
    return res;
  }

  constexpr double grad_tol = 1e-6;
  constexpr double ridge = 1e-6;
  Eigen::VectorXd grad(k);
  Eigen::MatrixXd hess(k, k);
  double f = -cox_eval(Xk, res.beta, status, &grad, &hess);

  for (int iter = 1; iter <= max_iter; ++iter) {
    res.iterations = iter;
    if (grad.lpNorm<Eigen::Infinity>() < grad_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd dir;
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() == Eigen::Success) {
      dir = llt.solve(-grad);
    } else {
      Eigen::MatrixXd damped = hess + ridge * Eigen::MatrixXd::Identity(k, k);
      Eigen::LLT<Eigen::MatrixXd> llt2(damped);
      if (llt2.info() != Eigen::Success) {
        res.diagnostic = "hessian not positive definite";
        break;
      }
      dir = llt2.solve(-grad);
    }

    double step = 1.0;
    bool improved = false;
    Eigen::VectorXd trial;
    for (int h = 0; h < 30; ++h) {
      trial = res.beta + step * dir;
      const double ft = -partial_loglik(Xk, trial, status);
      if (std::isfinite(ft) && ft < f) {
        improved = true;
        break;
      }
      step *= 0.5;
      if (h == 0) {
        // retry direction with a ridge before pure halving
        Eigen::MatrixXd damped = hess + ridge * Eigen::MatrixXd::Identity(k, k);
        Eigen::LLT<Eigen::MatrixXd> llt2(damped);
        if (llt2.info() == Eigen::Success) dir = llt2.solve(-grad);
      }
    }
    if (!improved) {
      res.diagnostic = "no descent step found";
      break;
    }
    res.beta = trial;
    f = -cox_eval(Xk, res.beta, status, &grad, &hess);
    if (res.beta.lpNorm<Eigen::Infinity>() > 1e3) {
      res.diagnostic = "divergent estimate (monotone likelihood?)";
      break;
    }
  }

  res.loglik = -f;
  if (!res.converged && res.diagnostic.empty()) {
    res.diagnostic = "max iterations reached";
  }
  return res;
}

CoxMleResult cox_mle(const Eigen::MatrixXd& Xk, const Eigen::VectorXi& status) {
  return cox_mle(Xk, status, Eigen::VectorXd::Zero(Xk.cols()), 100);
}

}  // namespace bvs
