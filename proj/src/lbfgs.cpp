#include "bvs/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <vector>

namespace bvs {

namespace {

struct LinePoint {
  double alpha;
  double phi;
  double dphi;
};

// Strong Wolfe line search (bracket + zoom). Returns alpha <= 0 on failure.
double wolfe_search(const ObjectiveFn& fg, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& dir, double phi0, double dphi0,
                    double c1, double c2, Eigen::VectorXd& x_out,
                    double& f_out, Eigen::VectorXd& g_out) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd g(n);
  auto eval = [&](double alpha) -> LinePoint {
    x_out = x + alpha * dir;
    const double f = fg(x_out, g);
    const double d = std::isfinite(f) ? g.dot(dir)
                                      : std::numeric_limits<double>::infinity();
    return {alpha, f, d};
  };

  auto zoom = [&](LinePoint lo, LinePoint hi) -> double {
    for (int it = 0; it < 40; ++it) {
      const double alpha = 0.5 * (lo.alpha + hi.alpha);
      LinePoint mid = eval(alpha);
      if (!std::isfinite(mid.phi) || mid.phi > phi0 + c1 * alpha * dphi0 ||
          mid.phi >= lo.phi) {
        hi = mid;
      } else {
        if (std::abs(mid.dphi) <= -c2 * dphi0) {
          f_out = mid.phi;
          g_out = g;
          x_out = x + alpha * dir;
          return alpha;
        }
        if (mid.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = mid;
      }
      if (std::abs(hi.alpha - lo.alpha) < 1e-16) break;
    }
    if (std::isfinite(lo.phi) && lo.phi < phi0 && lo.alpha > 0.0) {
      LinePoint fin = eval(lo.alpha);
      f_out = fin.phi;
      g_out = g;
      x_out = x + lo.alpha * dir;
      return lo.alpha;
    }
    return -1.0;
  };

  LinePoint prev{0.0, phi0, dphi0};
  double alpha = 1.0;
  for (int it = 0; it < 30; ++it) {
    LinePoint cur = eval(alpha);
    if (!std::isfinite(cur.phi)) {
      // infeasible (e.g. prior barrier): bisect toward the feasible end
      alpha = 0.5 * (prev.alpha + alpha);
      if (alpha < 1e-16) return -1.0;
      continue;
    }
    if (cur.phi > phi0 + c1 * alpha * dphi0 || (it > 0 && cur.phi >= prev.phi)) {
      return zoom(prev, cur);
    }
    if (std::abs(cur.dphi) <= -c2 * dphi0) {
      f_out = cur.phi;
      g_out = g;
      x_out = x + alpha * dir;
      return alpha;
    }
    if (cur.dphi >= 0.0) {
      return zoom(cur, prev);
    }
    prev = cur;
    alpha *= 2.0;
  }
  return -1.0;
}

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& fg, const Eigen::VectorXd& x0,
                           const LbfgsOptions& opts) {
  const int n = static_cast<int>(x0.size());
  LbfgsResult res;
  res.x = x0;
  res.grad.resize(n);
  res.f = fg(res.x, res.grad);
  if (!std::isfinite(res.f)) {
    res.diagnostic = "objective not finite at start";
    return res;
  }
  if (n == 0) {
    res.converged = true;
    return res;
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  double gamma = 1.0;

  Eigen::VectorXd q(n), dir(n), x_new(n), g_new(n);
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    res.iterations = iter;
    if (res.grad.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      res.converged = true;
      return res;
    }

    // two-loop recursion
    q = res.grad;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha_i(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha_i[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha_i[i] * y_hist[i];
    }
    q *= gamma;
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha_i[i] - beta) * s_hist[i];
    }
    dir = -q;

    double dphi0 = res.grad.dot(dir);
    if (dphi0 >= 0.0) {  // not a descent direction: reset to steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      gamma = 1.0;
      dir = -res.grad;
      dphi0 = res.grad.dot(dir);
    }

    double f_new = 0.0;
    const double alpha =
        wolfe_search(fg, res.x, dir, res.f, dphi0, opts.wolfe_c1, opts.wolfe_c2,
                     x_new, f_new, g_new);
    if (alpha <= 0.0) {
      res.diagnostic = "line search failed";
      return res;
    }

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g_new - res.grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      gamma = sy / y.dot(y);
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    res.x = x_new;
    res.f = f_new;
    res.grad = g_new;
  }
  res.diagnostic = "max iterations reached";
  return res;
}

}  // namespace bvs
