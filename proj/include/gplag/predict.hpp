#pragma once

#include <vector>

#include <Eigen/Core>

#include "gplag/data.hpp"
#include "gplag/inference.hpp"
#include "gplag/kernels.hpp"

namespace gplag {

struct PredictionResult {
  std::vector<Point> query;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // of a new noisy observation, clamped at 0
  int clamped = 0;           // variances raised from round-off negatives
};

/// Gaussian conditional (BLUP) at the query points given centered training
/// data; series offsets recorded in `train` are added back to the mean.
PredictionResult blup_predict(const KernelSpec& spec, const MultiParams& params,
                              const TimeSeriesSet& train, const std::vector<Point>& query);
PredictionResult blup_predict(const FitResult& fit, const TimeSeriesSet& train,
                              const std::vector<Point>& query);

/// Conditional mean and variance at `query_times` for a GP fitted to one
/// series alone; `train` values are used as given (no offset handling).
PredictionResult single_series_predict(const KernelSpec& spec, const SingleSeriesFit& fit,
                                       const std::vector<Observation>& train,
                                       const std::vector<double>& query_times);

/// Mean squared error against `truth`, whose rows must line up with the
/// query points (same series and time).
double mse(const PredictionResult& pred, const TimeSeriesSet& truth);
/// MSE restricted to points of one series.
double mse(const PredictionResult& pred, const TimeSeriesSet& truth, int series);

/// Query points at every observation of `set`, in row order.
std::vector<Point> query_points(const TimeSeriesSet& set);

}  // namespace gplag
