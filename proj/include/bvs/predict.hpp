#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "bvs/dataset.hpp"
#include "bvs/posterior.hpp"

namespace bvs {

// Right-continuous step function: value(t) = initial for t < knots[0],
// values[i] on [knots[i], knots[i+1]).
struct StepFunction {
  std::vector<double> knots;
  std::vector<double> values;
  double initial = 1.0;

  double operator()(double t) const;
};

// Product-limit estimator of the survival function; drops at event times.
// For the censoring-distribution estimate pass 1 - status.
StepFunction kaplan_meier(const Eigen::VectorXd& times,
                          const Eigen::VectorXi& status);

// Evaluate G at the training time nearest to t (ties toward the smaller
// time); train_times must be sorted ascending.
double g_interpolate(const StepFunction& G, const std::vector<double>& train_times,
                     double t);

// IPCW-weighted time-dependent sensitivity / unweighted specificity.
// g_at_times(i) is the interpolated training-set G at test time i.
// Returns NaN when the denominator is zero.
double sensitivity(double t, double c, const Eigen::VectorXd& marker,
                   const Eigen::VectorXd& times, const Eigen::VectorXi& status,
                   const Eigen::VectorXd& g_at_times);
double specificity(double t, double c, const Eigen::VectorXd& marker,
                   const Eigen::VectorXd& times);

struct AucInput {
  std::vector<Eigen::VectorXd> markers;  // one marker vector per model
  std::vector<double> weights;           // model-averaging weights, sum 1
  Eigen::VectorXd test_times;
  Eigen::VectorXi test_status;
  Eigen::VectorXd g_at_test_times;
};

// Model-averaged time-dependent AUC: sensitivity/specificity averaged across
// models at each threshold, trapezoidal area under the averaged ROC curve.
// Grid times with undefined estimates yield NaN.
std::vector<double> auc_curve(const std::vector<double>& t_grid,
                              const AucInput& input);

// Cumulative baseline hazard (Breslow estimator) on the sorted dataset.
StepFunction breslow(const SurvivalDataset& dataset, const ModelId& model,
                     const Eigen::VectorXd& beta);

enum class CurveMode { HPPM, BMA };

// Per-subject survival curves: exp(-H0(t))^exp(risk score) for each model,
// mixed with the given weights. Subjects are rows with all p columns.
std::vector<StepFunction> survival_curves(
    const SurvivalDataset& train,
    const std::vector<std::pair<ScoredModel, double>>& weighted_models,
    const Eigen::MatrixXd& subjects);

struct CvFolds {
  std::vector<int> assignment;  // fold id per row
  std::vector<std::string> warnings;
};

// Censoring-balanced fold assignment: events and censored records are
// shuffled separately and dealt round-robin.
CvFolds cv_folds(const SurvivalDataset& dataset, int k_folds, std::uint64_t seed);

}  // namespace bvs
