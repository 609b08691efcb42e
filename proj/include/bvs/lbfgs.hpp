#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>

namespace bvs {

// Objective callback: returns f(x) and fills grad. May return +inf to mark
// infeasible points (the line search backs away from them).
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 500;
  double grad_tol = 1e-5;  // sup-norm of gradient
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  bool converged = false;
  int iterations = 0;
  std::string diagnostic;
};

// Limited-memory BFGS with a strong Wolfe line search.
LbfgsResult lbfgs_minimize(const ObjectiveFn& fg, const Eigen::VectorXd& x0,
                           const LbfgsOptions& opts = {});

}  // namespace bvs
