#include "gplag/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "gplag/error.hpp"
#include "gplag/linalg.hpp"
#include "gplag/rng.hpp"

namespace gplag {

std::vector<double> regular_grid(int n, double lo, double hi) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return t;
}

TimeDesign gen_time_design(int n_per_series, int num_series, DesignStyle style,
                           const std::vector<double>& lags, double lo, double hi,
                           std::uint64_t seed) {
  if (n_per_series < 2) throw ArgumentError("need at least 2 points per series");
  if (num_series < 1) throw ArgumentError("need at least one series");
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw ArgumentError("invalid time range");
  }
  if (style == DesignStyle::Explicit) {
    throw ArgumentError("explicit designs are built with explicit_design()");
  }
  std::vector<double> shift = lags;
  shift.resize(num_series, 0.0);

  std::vector<double> base = regular_grid(n_per_series, lo, hi);
  if (style == DesignStyle::JitteredGrid) {
    Rng rng(seed);
    for (double& t : base) t += rng.uniform(-0.25, 0.25);
    std::sort(base.begin(), base.end());
  }
  TimeDesign d;
  d.style = style;
  d.lags = shift;
  for (int l = 0; l < num_series; ++l) {
    std::vector<double> t = base;
    for (double& x : t) x += shift[l];
    d.times.push_back(std::move(t));
  }
  return d;
}

TimeDesign explicit_design(std::vector<std::vector<double>> times) {
  TimeDesign d;
  for (auto& t : times) std::sort(t.begin(), t.end());
  d.times = std::move(times);
  d.style = DesignStyle::Explicit;
  d.lags.assign(d.times.size(), 0.0);
  return d;
}

TimeSeriesSet sample_gplag(const KernelSpec& spec, const MultiParams& params,
                           const TimeDesign& design, std::uint64_t seed) {
  if (design.num_series() > params.num_series()) {
    throw ArgumentError("design has more series than the parameters");
  }
  std::vector<Point> pts;
  for (int l = 0; l < design.num_series(); ++l) {
    for (double t : design.times[l]) pts.push_back({t, l + 1});
  }
  const Eigen::MatrixXd K = covariance_matrix(spec, params, pts, false);
  const auto fac = factorize_with_jitter(K, params.sigma2);
  Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::VectorXd z(n), noise(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  for (Eigen::Index i = 0; i < n; ++i) noise[i] = rng.normal();
  const Eigen::VectorXd y = fac.llt.matrixL() * z + std::sqrt(params.tau2) * noise;

  std::vector<Observation> obs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    obs[i] = {pts[i].t, pts[i].series, y[static_cast<Eigen::Index>(i)]};
  }
  return TimeSeriesSet(std::move(obs), design.num_series());
}

std::vector<double> gen_arctan(double k, double s, int n, double lo, double hi) {
  if (!(k > 0.0)) throw ArgumentError("arctan generator needs k > 0");
  if (n < 2) throw ArgumentError("arctan generator needs n >= 2");
  const double norm = std::atan(k);
  std::vector<double> v;
  for (double t : regular_grid(n, lo, hi)) v.push_back(std::atan(k * (t + s)) / norm);
  return v;
}

TimeSeriesSet gen_linear_t_noise(int n, double slope, double intercept, double noise_scale,
                                 double lag, double df, std::uint64_t seed) {
  if (!(df > 2.0)) throw ArgumentError("Student-t noise needs df > 2");
  if (n < 2) throw ArgumentError("need at least 2 points");
  Rng rng(seed);
  std::vector<Observation> obs;
  for (int i = 0; i < n; ++i) {
    const double t = i;
    obs.push_back({t, 1, slope * t + intercept + noise_scale * rng.student_t(df)});
  }
  for (int i = 0; i < n; ++i) {
    const double t = i;
    obs.push_back({t, 2, slope * (t - lag) + intercept + noise_scale * rng.student_t(df)});
  }
  return TimeSeriesSet(std::move(obs), 2);
}

}  // namespace gplag
