#include "gplag/predict.hpp"

#include <cmath>

#include "gplag/error.hpp"
#include "gplag/linalg.hpp"

namespace gplag {

PredictionResult blup_predict(const KernelSpec& spec, const MultiParams& params,
                              const TimeSeriesSet& train, const std::vector<Point>& query) {
  const int L = params.num_series();
  for (const auto& q : query) {
    if (q.series < 1 || q.series > L) throw ArgumentError("query series id outside 1..L");
  }
  const auto train_pts = points_of(train);
  const Eigen::MatrixXd K = covariance_matrix(spec, params, train_pts, true);
  const auto fac = factorize_with_jitter(K, params.sigma2);
  const Eigen::MatrixXd Ks = cross_covariance(spec, params, train_pts, query);
  const Eigen::VectorXd alpha = fac.solve(train.values());
  const Eigen::MatrixXd V = fac.llt.matrixL().solve(Ks);

  PredictionResult out;
  out.query = query;
  out.mean = Ks.transpose() * alpha;
  out.variance.resize(static_cast<Eigen::Index>(query.size()));
  for (std::size_t j = 0; j < query.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double prior = kernel_value(spec, params.sigma2, params.b, 0.0, 0.0) + params.tau2;
    double v = prior - V.col(jj).squaredNorm();
    if (v < 0.0) {
      v = 0.0;
      ++out.clamped;
    }
    out.variance[jj] = v;
    if (query[j].series <= train.num_series()) out.mean[jj] += train.offset(query[j].series);
  }
  return out;
}

PredictionResult blup_predict(const FitResult& fit, const TimeSeriesSet& train,
                              const std::vector<Point>& query) {
  return blup_predict(fit.spec, fit.params, train, query);
}

PredictionResult single_series_predict(const KernelSpec& spec, const SingleSeriesFit& fit,
                                       const std::vector<Observation>& train,
                                       const std::vector<double>& query_times) {
  if (train.empty()) throw ArgumentError("empty training series");
  std::vector<Point> train_pts;
  Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) {
    train_pts.push_back({train[i].t, 1});
    y[static_cast<Eigen::Index>(i)] = train[i].y;
  }
  std::vector<Point> query;
  for (double t : query_times) query.push_back({t, 1});

  MultiParams params = MultiParams::from_pairwise({fit.sigma2, fit.b, 0.0, 0.0, fit.tau2});
  const Eigen::MatrixXd K = covariance_matrix(spec, params, train_pts, true);
  const auto fac = factorize_with_jitter(K, params.sigma2);
  const Eigen::MatrixXd Ks = cross_covariance(spec, params, train_pts, query);
  const Eigen::MatrixXd V = fac.llt.matrixL().solve(Ks);

  PredictionResult out;
  out.query = query;
  out.mean = Ks.transpose() * fac.solve(y);
  out.variance.resize(static_cast<Eigen::Index>(query.size()));
  const double prior = kernel_value(spec, params.sigma2, params.b, 0.0, 0.0) + params.tau2;
  for (Eigen::Index j = 0; j < out.variance.size(); ++j) {
    double v = prior - V.col(j).squaredNorm();
    if (v < 0.0) {
      v = 0.0;
      ++out.clamped;
    }
    out.variance[j] = v;
  }
  return out;
}

std::vector<Point> query_points(const TimeSeriesSet& set) { return points_of(set); }

namespace {

double mse_impl(const PredictionResult& pred, const TimeSeriesSet& truth, int series) {
  if (pred.query.size() != truth.size() ||
      static_cast<std::size_t>(pred.mean.size()) != truth.size()) {
    throw ArgumentError("prediction and truth differ in length");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& o = truth[i];
    if (pred.query[i].series != o.series || pred.query[i].t != o.t) {
      throw ArgumentError("prediction query does not line up with truth at row " +
                          std::to_string(i + 1));
    }
    if (series > 0 && o.series != series) continue;
    // Truth carries its own offsets when it is a centered split.
    const double y = o.y + truth.offset(o.series);
    const double r = pred.mean[static_cast<Eigen::Index>(i)] - y;
    sum += r * r;
    ++count;
  }
  if (count == 0) throw ArgumentError("no points to score");
  return sum / static_cast<double>(count);
}

}  // namespace

double mse(const PredictionResult& pred, const TimeSeriesSet& truth) {
  return mse_impl(pred, truth, 0);
}

double mse(const PredictionResult& pred, const TimeSeriesSet& truth, int series) {
  return mse_impl(pred, truth, series);
}

}  // namespace gplag
