#include "bvs/hyperparam.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "bvs/cox.hpp"
#include "bvs/priors.hpp"
#include "bvs/rng.hpp"
#include "bvs/threads.hpp"

namespace bvs {

namespace {

enum Purpose : std::uint64_t {
  kSurvival = 1,
  kCensoring = 2,
  kColumns = 3,
};

double normal_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (a >= b) return 0.0;
  const double fa = f(a);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

NullMleSample simulate_null_mles(const SurvivalDataset& design, int reps,
                                 std::uint64_t seed, int threads) {
  if (reps <= 0) throw std::invalid_argument("simulate_null_mles: reps must be >= 1");
  const int n = design.n();
  const int p = design.p();

  // exponential censoring rate matched to the observed censoring fraction:
  // for T ~ Exp(1), C ~ Exp(rho), P(C < T) = rho / (1 + rho)
  const double frac = design.censoring_fraction();
  const double cens_rate = frac > 0.0 ? frac / (1.0 - frac) : 0.0;

  // column sequence: shuffled, cycled, so draws are without replacement
  // until the design is exhausted
  std::vector<int> columns(p);
  std::iota(columns.begin(), columns.end(), 0);
  {
    StreamRng rng(seed, kColumns);
    rng.shuffle(columns);
  }

  std::vector<double> pooled(reps, std::numeric_limits<double>::quiet_NaN());
  parallel_for(reps, threads, [&](int rep) {
    StreamRng surv_rng(seed, rep, kSurvival);
    StreamRng cens_rng(seed, rep, kCensoring);
    Eigen::VectorXd y(n);
    Eigen::VectorXi delta(n);
    int events = 0;
    for (int i = 0; i < n; ++i) {
      const double t = surv_rng.exponential(1.0);
      const double c = cens_rate > 0.0
                           ? cens_rng.exponential(cens_rate)
                           : std::numeric_limits<double>::infinity();
      y(i) = std::min(t, c);
      delta(i) = t <= c ? 1 : 0;
      events += delta(i);
    }
    if (events == 0) return;  // dropped

    const int col = columns[rep % p];
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (y(a) != y(b)) return y(a) < y(b);
      return delta(a) > delta(b);
    });
    Eigen::MatrixXd Xk(n, 1);
    Eigen::VectorXi status(n);
    for (int i = 0; i < n; ++i) {
      Xk(i, 0) = design.design(order[i], col);
      status(i) = delta(order[i]);
    }
    const CoxMleResult fit = cox_mle(Xk, status);
    if (fit.converged) pooled[rep] = fit.beta(0);
  });

  NullMleSample out;
  for (double v : pooled) {
    if (std::isnan(v)) {
      ++out.dropped;
    } else {
      out.coefficients.push_back(v);
    }
  }
  if (out.coefficients.empty()) {
    throw std::runtime_error("simulate_null_mles: all replicates failed");
  }
  const double m = std::accumulate(out.coefficients.begin(),
                                   out.coefficients.end(), 0.0) /
                   out.coefficients.size();
  double ss = 0.0;
  for (double v : out.coefficients) ss += (v - m) * (v - m);
  out.mean = m;
  out.sd = std::sqrt(ss / std::max<std::size_t>(1, out.coefficients.size() - 1));
  return out;
}

double overlap(double tau, double r, double null_mean, double null_sd) {
  if (null_sd <= 0.0) throw std::invalid_argument("overlap: degenerate null sd");
  if (tau <= 0.0) throw std::invalid_argument("overlap: tau must be > 0");
  auto f = [&](double b) {
    return std::min(pimom_pdf(b, tau, r), normal_pdf(b, null_mean, null_sd));
  };
  // min{.,.} <= normal, so mass beyond 12 null sds is negligible; split at
  // zero where the piMOM density vanishes
  const double lo = null_mean - 12.0 * null_sd;
  const double hi = null_mean + 12.0 * null_sd;
  constexpr double tol = 5e-7;
  if (lo < 0.0 && hi > 0.0) {
    return integrate(f, lo, 0.0, tol) + integrate(f, 0.0, hi, tol);
  }
  return integrate(f, lo, hi, 2.0 * tol);
}

TauSelection select_tau(const SurvivalDataset& design, double alpha, double r,
                        int reps, std::uint64_t seed, int threads) {
  if (alpha <= 0.0) throw std::invalid_argument("select_tau: alpha must be > 0");
  const NullMleSample null_fit = simulate_null_mles(design, reps, seed, threads);

  TauSelection out;
  out.null_mean = null_fit.mean;
  out.null_sd = null_fit.sd;
  out.dropped = null_fit.dropped;
  out.threshold = 1.0 / std::sqrt(static_cast<double>(design.p()));

  constexpr int kGridSize = 40;
  const double lo = 1e-4, hi = 25.0;
  out.grid.resize(kGridSize);
  out.grid_overlap.resize(kGridSize);
  int first_pass = -1;
  for (int i = 0; i < kGridSize; ++i) {
    const double t = lo * std::pow(hi / lo, static_cast<double>(i) / (kGridSize - 1));
    out.grid[i] = t;
    out.grid_overlap[i] = overlap(t, r, null_fit.mean, null_fit.sd);
    if (first_pass < 0 && out.grid_overlap[i] < out.threshold) first_pass = i;
  }

  if (first_pass < 0) {
    out.grid_exhausted = true;
    out.tau1 = hi;
  } else if (first_pass == 0) {
    out.tau1 = out.grid[0];
  } else {
    double bad = out.grid[first_pass - 1];
    double good = out.grid[first_pass];
    while ((good - bad) / good > 1e-3) {
      const double mid = std::sqrt(bad * good);
      if (overlap(mid, r, null_fit.mean, null_fit.sd) < out.threshold) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    out.tau1 = good;
  }
  out.tau = std::min(out.tau1, alpha * alpha);
  return out;
}

}  // namespace bvs
