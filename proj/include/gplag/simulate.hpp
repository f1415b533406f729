#pragma once

#include <cstdint>
#include <vector>

#include "gplag/data.hpp"
#include "gplag/kernels.hpp"

namespace gplag {

enum class DesignStyle { JitteredGrid, Regular, Explicit };

struct TimeDesign {
  std::vector<std::vector<double>> times;  // per series, sorted
  DesignStyle style = DesignStyle::Explicit;
  std::vector<double> lags;

  int num_series() const { return static_cast<int>(times.size()); }
};

/// Base grid of n points spanning [lo, hi] inclusive; the jittered style adds
/// one Unif(-1/4, 1/4) draw per grid point, shared by all series, and every
/// series l is then shifted by lags[l].
TimeDesign gen_time_design(int n_per_series, int num_series, DesignStyle style,
                           const std::vector<double>& lags, double lo, double hi,
                           std::uint64_t seed);
TimeDesign explicit_design(std::vector<std::vector<double>> times);

/// Exact zero-mean draw Y = L z + tau z' with L the Cholesky factor of the
/// noise-free covariance.
TimeSeriesSet sample_gplag(const KernelSpec& spec, const MultiParams& params,
                           const TimeDesign& design, std::uint64_t seed);

/// arctan(k (t + s)) / arctan(k) on a regular grid of n points over [lo, hi].
std::vector<double> gen_arctan(double k, double s, int n, double lo, double hi);
std::vector<double> regular_grid(int n, double lo, double hi);

/// Two series at t = 0..n-1: slope*t + intercept + scale*e1 and
/// slope*(t - lag) + intercept + scale*e2 with Student-t(df) noise.
TimeSeriesSet gen_linear_t_noise(int n, double slope, double intercept, double noise_scale,
                                 double lag, double df, std::uint64_t seed);

}  // namespace gplag
