#pragma once

#include <Eigen/Core>
#include <string>

namespace bvs {

// Per-call scratch for the suffix-sum quantities of the partial likelihood.
// Rows must be sorted by ascending time so the risk set at row i is {j >= i}.
//   eta_shifted(i) = exp(x_i'beta - shift_i)   (shift = running suffix max)
//   log_psi(i)     = log sum_{j>=i} exp(x_j'beta)
//   xstar          = k x n, column i = eta-weighted mean of rows i..n of Xk;
//                    a convex combination of at-risk rows.
struct CoxWorkspace {
  Eigen::VectorXd linpred;
  Eigen::VectorXd log_psi;
  Eigen::MatrixXd xstar;
};

// delta' (Xk beta - log psi); one backward pass, O(nk).
double partial_loglik(const Eigen::MatrixXd& Xk, const Eigen::VectorXd& beta,
                      const Eigen::VectorXi& status);

// [xstar - Xk'] delta, the gradient of the negative partial log-likelihood.
Eigen::VectorXd neg_gradient(const Eigen::MatrixXd& Xk,
                             const Eigen::VectorXd& beta,
                             const Eigen::VectorXi& status);

// Hessian of the negative partial log-likelihood: sum over events of the
// eta-weighted covariance of at-risk rows. Symmetric PSD. O(n k^2).
Eigen::MatrixXd neg_hessian(const Eigen::MatrixXd& Xk,
                            const Eigen::VectorXd& beta,
                            const Eigen::VectorXi& status);

// All of the above in one pass; any output pointer may be null.
// Returns the partial log-likelihood. Fills workspace if given.
double cox_eval(const Eigen::MatrixXd& Xk, const Eigen::VectorXd& beta,
                const Eigen::VectorXi& status, Eigen::VectorXd* neg_grad,
                Eigen::MatrixXd* neg_hess, CoxWorkspace* ws = nullptr);

struct CoxMleResult {
  Eigen::VectorXd beta;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string diagnostic;
};

// Newton iterations on the partial likelihood. Ridge-damped steps with up to
// 30 halvings when the solve fails or the objective worsens; convergence at
// gradient sup-norm < 1e-6.
CoxMleResult cox_mle(const Eigen::MatrixXd& Xk, const Eigen::VectorXi& status,
                     const Eigen::VectorXd& init, int max_iter = 100);
CoxMleResult cox_mle(const Eigen::MatrixXd& Xk, const Eigen::VectorXi& status);

}  // namespace bvs
