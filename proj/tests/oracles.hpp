// Test-only oracles: finite differences, quadrature, and brute-force
// evaluators kept independent of the library's computation paths.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Central finite-difference gradient of a scalar function.
inline Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

// Central finite-difference Jacobian of a vector function (used on gradients
// to produce Hessians).
inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
    const Eigen::VectorXd& x, double h = 1e-5) {
  const Eigen::VectorXd g0 = g(x);
  Eigen::MatrixXd J(g0.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    J.col(i) = (g(a) - g(b)) / (2.0 * h);
  }
  return J;
}

// Direct term-by-term evaluation of the sorted-risk-set partial likelihood:
// sum over events of [x_i'b - log sum_{j>=i} exp(x_j'b)], double loop.
inline double brute_partial_loglik(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& beta,
                                   const Eigen::VectorXi& status) {
  const int n = static_cast<int>(X.rows());
  long double total = 0.0L;
  for (int i = 0; i < n; ++i) {
    if (status(i) != 1) continue;
    long double denom = 0.0L;
    for (int j = i; j < n; ++j) {
      denom += std::exp(static_cast<long double>(X.row(j).dot(beta)));
    }
    total += X.row(i).dot(beta) - std::log(denom);
  }
  return static_cast<double>(total);
}

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-10, int depth = 50) {
  std::function<double(double, double, double, double, double, double, int)>
      rec = [&](double lo, double hi, double flo, double fmid, double fhi,
                double whole, int d) -> double {
    const double m = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - m) / 6.0 * (fmid + 4.0 * frm + fhi);
    const double delta = left + right - whole;
    if (d <= 0 || std::abs(delta) <= 15.0 * tol) {
      return left + right + delta / 15.0;
    }
    return rec(lo, m, flo, flm, fmid, left, d - 1) +
           rec(m, hi, fmid, frm, fhi, right, d - 1);
  };
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(a, b, fa, fm, fb, whole, depth);
}

}  // namespace oracle
