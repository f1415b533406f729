#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gplag/data.hpp"

namespace gplag {

struct LagScan {
  std::vector<double> lags;
  std::vector<double> correlations;  // -inf where fewer than 3 pairs overlap
  double best_lag = 0.0;
  double best_corr = 0.0;
};

/// Time-lagged cross-correlation of series 2 against series 1. For lag d the
/// series-2 point at t is paired with the series-1 point nearest t + d (within
/// half the median series-1 spacing), so the best lag shares the sign
/// convention of the kernel lag s: y2(t) ~ y1(t + s).
LagScan tlcc(const TimeSeriesSet& set, const std::vector<double>& lag_grid);
LagScan tlcc(const std::vector<Observation>& first, const std::vector<Observation>& second,
             const std::vector<double>& lag_grid);

struct WarpResult {
  double distance = 0.0;
  std::vector<std::pair<int, int>> path;  // 1-based (i, j), DTW only
  double gamma = 0.0;                     // soft variants only
};

/// Classic DTW with squared-difference cost and steps (1,1), (1,0), (0,1).
WarpResult dtw(const std::vector<double>& x, const std::vector<double>& y);

/// Soft-DTW value with smoothing gamma > 0.
double soft_dtw(const std::vector<double>& x, const std::vector<double>& y, double gamma);
/// SDTW(x,y) - (SDTW(x,x) + SDTW(y,y)) / 2.
double soft_dtw_divergence(const std::vector<double>& x, const std::vector<double>& y,
                           double gamma);

struct KMeansResult {
  std::vector<int> labels;  // 0-based cluster ids
  std::vector<double> centers;
  double sse = 0.0;
};

/// 1-D Lloyd's algorithm, best of `restarts` k-means++ initialisations.
KMeansResult kmeans(const std::vector<double>& values, int k, std::uint64_t seed,
                    int restarts = 10);

/// Adjusted Rand index; two single-cluster partitions score 1.
double ari(const std::vector<int>& labels, const std::vector<int>& truth);
/// Mutual information normalised by the arithmetic mean of the entropies.
double nmi(const std::vector<int>& labels, const std::vector<int>& truth);

}  // namespace gplag
