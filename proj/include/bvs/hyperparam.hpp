#pragma once

#include <cstdint>
#include <vector>

#include "bvs/dataset.hpp"

namespace bvs {

struct NullMleSample {
  std::vector<double> coefficients;  // pooled univariate MLE estimates
  int dropped = 0;                   // unconverged fits
  double mean = 0.0;
  double sd = 0.0;
};

// Null-model simulation: survival times from a standard exponential,
// censoring exponential with rate matched to the observed censoring fraction,
// univariate Cox MLEs on randomly drawn design columns, pooled.
NullMleSample simulate_null_mles(const SurvivalDataset& design, int reps,
                                 std::uint64_t seed, int threads = 1);

// Overlap integral min{ piMOM(b; tau, r), Normal(b; mu, sd) } db by adaptive
// quadrature (tol 1e-6).
double overlap(double tau, double r, double null_mean, double null_sd);

struct TauSelection {
  double tau = 0.25;      // min(tau1, alpha^2)
  double tau1 = 0.25;     // smallest tau with overlap < threshold
  double threshold = 0.0; // 1/sqrt(p)
  double null_mean = 0.0;
  double null_sd = 0.0;
  int dropped = 0;
  bool grid_exhausted = false;  // no grid point met the threshold
  std::vector<double> grid;
  std::vector<double> grid_overlap;
};

// Grid search (40 log-spaced points in [1e-4, 25]) for the smallest tau with
// overlap below 1/sqrt(p), refined by bisection to relative tolerance 1e-3;
// capped at alpha^2.
TauSelection select_tau(const SurvivalDataset& design, double alpha, double r,
                        int reps, std::uint64_t seed, int threads = 1);

}  // namespace bvs
