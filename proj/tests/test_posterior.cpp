#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bvs/cox.hpp"
#include "bvs/posterior.hpp"
#include "bvs/rng.hpp"
#include "oracles.hpp"

using namespace bvs;

namespace {

// simulated dataset with proportional-hazards structure
SurvivalDataset simulate(int n, int p, const Eigen::VectorXd& beta_true,
                         std::uint64_t seed, double censor_rate = 0.0) {
  StreamRng rng(seed);
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd t(n);
  Eigen::VectorXi status(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
    const double lp = X.row(i).head(beta_true.size()).dot(beta_true);
    const double death = rng.exponential(std::exp(lp));
    const double cens = censor_rate > 0.0 ? rng.exponential(censor_rate)
                                          : std::numeric_limits<double>::infinity();
    t(i) = std::min(death, cens);
    status(i) = death <= cens ? 1 : 0;
  }
  std::vector<std::string> names(p);
  for (int j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);
  return make_dataset(t, status, X, names, {});
}

}  // namespace

TEST_CASE("neg_log_posterior decomposes additively") {
  const SurvivalDataset ds = simulate(40, 2, Eigen::Vector2d(0.8, -0.5), 3);
  const Eigen::MatrixXd Xk = ds.submatrix(ModelId({0, 1}));
  PriorSpec prior;
  Eigen::VectorXd beta(2);
  beta << 0.5, -0.4;
  const double g = neg_log_posterior(beta, Xk, ds.status, prior);
  CHECK(g == doctest::Approx(-partial_loglik(Xk, beta, ds.status) -
                             log_prior(beta, prior)));

  // barrier at zero
  beta(1) = 0.0;
  CHECK(std::isinf(neg_log_posterior(beta, Xk, ds.status, prior)));
}

TEST_CASE("neg_log_posterior derivatives match finite differences") {
  StreamRng rng(10);
  const SurvivalDataset ds = simulate(60, 3, Eigen::Vector3d(1.0, 0.0, -1.0), 4);
  const Eigen::MatrixXd Xk = ds.submatrix(ModelId({0, 1, 2}));
  for (auto family : {PriorFamily::piMOM, PriorFamily::pMOM}) {
    PriorSpec prior;
    prior.family = family;
    prior.tau = 0.3;
    for (int rep = 0; rep < 5; ++rep) {
      Eigen::VectorXd beta(3);
      for (int j = 0; j < 3; ++j) {
        beta(j) = (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.2, 1.5);
      }
      Eigen::VectorXd grad;
      Eigen::MatrixXd hess;
      neg_log_posterior(beta, Xk, ds.status, prior, &grad, &hess);
      auto f = [&](const Eigen::VectorXd& b) {
        return neg_log_posterior(b, Xk, ds.status, prior);
      };
      CHECK((oracle::fd_gradient(f, beta) - grad).lpNorm<Eigen::Infinity>() <=
            1e-5 * (1.0 + grad.lpNorm<Eigen::Infinity>()));
      auto gf = [&](const Eigen::VectorXd& b) {
        Eigen::VectorXd gg;
        neg_log_posterior(b, Xk, ds.status, prior, &gg);
        return gg;
      };
      const Eigen::MatrixXd fdh = oracle::fd_jacobian(gf, beta);
      CHECK((fdh - hess).norm() <= 1e-4 * (1.0 + hess.norm()));
    }
  }
}

TEST_CASE("map_estimate matches a grid search in one dimension") {
  const SurvivalDataset ds = simulate(200, 1, Eigen::VectorXd::Constant(1, 1.2), 5);
  const Eigen::MatrixXd Xk = ds.submatrix(ModelId({0}));
  PriorSpec prior;
  const MapResult map = map_estimate(Xk, ds.status, prior);
  REQUIRE(map.converged);

  // grid minimizer of g over a fine positive/negative grid
  double best_b = 0.0, best_g = std::numeric_limits<double>::infinity();
  for (double b = -3.0; b <= 3.0; b += 1e-3) {
    if (std::abs(b) < 1e-6) continue;
    Eigen::VectorXd bb(1);
    bb << b;
    const double g = neg_log_posterior(bb, Xk, ds.status, prior);
    if (g < best_g) {
      best_g = g;
      best_b = b;
    }
  }
  CHECK(map.beta(0) == doctest::Approx(best_b).epsilon(2e-3));
  CHECK(map.g_value <= best_g + 1e-8);

  // gradient at the reported MAP is small
  Eigen::VectorXd grad;
  neg_log_posterior(map.beta, Xk, ds.status, prior, &grad);
  CHECK(grad.lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("map is a local minimum against perturbations") {
  const SurvivalDataset ds = simulate(100, 2, Eigen::Vector2d(0.9, -0.7), 6);
  const Eigen::MatrixXd Xk = ds.submatrix(ModelId({0, 1}));
  PriorSpec prior;
  const MapResult map = map_estimate(Xk, ds.status, prior);
  REQUIRE(map.converged);
  StreamRng rng(77);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd delta(2);
    for (int j = 0; j < 2; ++j) delta(j) = rng.uniform(-0.05, 0.05);
    const double g = neg_log_posterior(map.beta + delta, Xk, ds.status, prior);
    CHECK(map.g_value <= g + 1e-10);
  }
}

TEST_CASE("symmetric null data: map lands near a prior mode") {
  // no signal: likelihood nearly flat, so g is dominated by the prior
  const SurvivalDataset ds = simulate(300, 1, Eigen::VectorXd::Zero(1), 7);
  const Eigen::MatrixXd Xk = ds.submatrix(ModelId({0}));
  PriorSpec prior;
  prior.tau = 0.25;
  const MapResult map = map_estimate(Xk, ds.status, prior);
  REQUIRE(map.converged);
  Eigen::VectorXd grad;
  neg_log_posterior(map.beta, Xk, ds.status, prior, &grad);
  CHECK(grad.lpNorm<Eigen::Infinity>() < 1e-5);
  // either mode is acceptable; magnitude near sqrt(tau) scale
  CHECK(std::abs(map.beta(0)) > 0.05);
  CHECK(std::abs(map.beta(0)) < 1.5);
}

TEST_CASE("Laplace marginal matches 1-D adaptive quadrature") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const SurvivalDataset ds =
        simulate(500, 1, Eigen::VectorXd::Constant(1, 1.0), seed);
    PriorSpec prior;
    const ScoredModel sm = score_model(ds, ModelId({0}), prior);
    REQUIRE(sm.converged);

    const Eigen::MatrixXd Xk = ds.submatrix(ModelId({0}));
    // posterior sd from the Hessian; integrate exp(-g) over +-8 sd with the
    // constant -g(map) factored out
    const double sd = std::exp(-0.5 * sm.hessian_logdet);
    const double center = sm.beta_map(0);
    const double g0 = -sm.log_marginal +
                      0.5 * std::log(2.0 * std::numbers::pi) -
                      0.5 * sm.hessian_logdet;  // = g(map)
    auto f = [&](double b) {
      Eigen::VectorXd bb(1);
      bb << b;
      const double g = neg_log_posterior(bb, Xk, ds.status, prior);
      return std::isfinite(g) ? std::exp(-(g - g0)) : 0.0;
    };
    // both prior-symmetric regions; the far one is negligible when the
    // likelihood concentrates but costs nothing to include
    const double lo1 = center - 8.0 * sd, hi1 = center + 8.0 * sd;
    const double lo2 = -center - 8.0 * sd, hi2 = -center + 8.0 * sd;
    double integral;
    if (std::max(lo1, lo2) <= std::min(hi1, hi2)) {
      integral = oracle::integrate(f, std::min(lo1, lo2), std::max(hi1, hi2),
                                   1e-10);
    } else {
      integral = oracle::integrate(f, lo1, hi1, 1e-10) +
                 oracle::integrate(f, lo2, hi2, 1e-10);
    }
    const double log_m_quad = std::log(integral) - g0;
    CHECK(std::abs(sm.log_marginal - log_m_quad) <=
          0.01 * std::abs(log_m_quad));
  }
}

TEST_CASE("empty model marginal is the covariate-free likelihood") {
  const SurvivalDataset ds = simulate(30, 2, Eigen::Vector2d(0.5, 0.5), 21);
  PriorSpec prior;
  const ScoredModel sm = score_model(ds, ModelId(std::vector<int>{}), prior);
  CHECK(sm.converged);
  double expected = 0.0;
  for (int i = 0; i < ds.n(); ++i) {
    if (ds.status(i) == 1) expected -= std::log(static_cast<double>(ds.n() - i));
  }
  CHECK(sm.log_marginal == doctest::Approx(expected));
  CHECK(sm.log_score ==
        doctest::Approx(expected + log_model_prior(0, 2, 1.0, 1.0)));
}

TEST_CASE("scores are invariant to column order inside the model") {
  const SurvivalDataset ds = simulate(80, 3, Eigen::Vector3d(1.0, -0.8, 0.4), 22);
  PriorSpec prior;
  // ModelId sorts its indices, so both spellings address the same model
  const ScoredModel a = score_model(ds, ModelId({2, 0}), prior);
  const ScoredModel b = score_model(ds, ModelId({0, 2}), prior);
  REQUIRE(a.converged);
  CHECK(a.log_marginal == doctest::Approx(b.log_marginal));
  CHECK(a.log_score == doctest::Approx(b.log_score));
}

TEST_CASE("normalize_scores") {
  ScoredModel a, b;
  a.model = ModelId({0});
  a.log_score = -10.0;
  a.converged = true;
  b.model = ModelId({1});
  b.log_score = -10.0;
  b.converged = true;

  SUBCASE("single model gets probability one") {
    const auto probs = normalize_scores({a});
    CHECK(probs[0] == doctest::Approx(1.0));
  }
  SUBCASE("equal scores split evenly") {
    const auto probs = normalize_scores({a, b});
    CHECK(probs[0] == doctest::Approx(0.5));
    CHECK(probs[1] == doctest::Approx(0.5));
  }
  SUBCASE("unconverged entries get zero") {
    ScoredModel c;
    c.model = ModelId({2});
    c.converged = false;
    c.log_score = 100.0;
    const auto probs = normalize_scores({a, b, c});
    CHECK(probs[2] == 0.0);
    CHECK(probs[0] + probs[1] == doctest::Approx(1.0));
  }
  SUBCASE("empty pool throws") {
    CHECK_THROWS_AS(normalize_scores({}), std::invalid_argument);
  }
  SUBCASE("probabilities sum to one and track scores monotonically") {
    StreamRng rng(31);
    std::vector<ScoredModel> pool;
    for (int i = 0; i < 12; ++i) {
      ScoredModel sm;
      sm.model = ModelId({i});
      sm.log_score = rng.uniform(-600.0, -500.0);
      sm.converged = true;
      pool.push_back(sm);
    }
    const auto probs = normalize_scores(pool);
    double total = 0.0;
    for (double p : probs) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) {
        if (pool[i].log_score < pool[j].log_score) CHECK(probs[i] < probs[j]);
      }
    }
  }
}

TEST_CASE("nested null covariate: smaller model usually wins") {
  int smaller_wins = 0;
  const int reps = 50;
  for (int rep = 0; rep < reps; ++rep) {
    const SurvivalDataset ds =
        simulate(150, 2, (Eigen::VectorXd(2) << 1.0, 0.0).finished(),
                 1000 + rep);
    PriorSpec prior;
    const ScoredModel small = score_model(ds, ModelId({0}), prior);
    const ScoredModel big = score_model(ds, ModelId({0, 1}), prior);
    if (!small.converged || !big.converged) continue;
    if (small.log_score > big.log_score) ++smaller_wins;
  }
  CHECK(smaller_wins >= 40);  // 80% of replicates
}
