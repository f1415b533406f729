#include <cmath>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "gplag/error.hpp"
#include "gplag/inference.hpp"
#include "gplag/linalg.hpp"
#include "gplag/predict.hpp"
#include "gplag/rng.hpp"
#include "gplag/simulate.hpp"

using namespace gplag;

namespace {

const KernelSpec kLExp{Family::LExp, 0.5, 1.0};
const KernelSpec kLRBF{Family::LRBF, 1.5, 1.0};

TimeSeriesSet small_set(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Observation> obs;
  for (int i = 0; i < 8; ++i) {
    obs.push_back({i + rng.uniform(-0.2, 0.2), 1, rng.normal()});
    obs.push_back({i + rng.uniform(-0.2, 0.2), 2, rng.normal()});
  }
  return TimeSeriesSet(obs, 2);
}

}  // namespace

TEST(Blup, InterpolatesNoiseFreeTraining) {
  const auto set = small_set(1);
  const auto p = MultiParams::from_pairwise({2.0, 0.5, 0.7, 1.0, 0.0});
  const auto pred = blup_predict(kLExp, p, set, query_points(set));
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_NEAR(pred.mean[i], set[i].y, 1e-8);
    EXPECT_LE(pred.variance[i], 1e-8 * 2.0);
  }
}

TEST(Blup, RevertsToPriorFarAway) {
  const auto set = center_series(small_set(2));
  const auto p = MultiParams::from_pairwise({2.0, 1.0, 0.5, 0.5, 0.1});
  const auto pred = blup_predict(kLRBF, p, set, {{100.0, 1}, {-100.0, 2}});
  EXPECT_NEAR(pred.mean[0], set.offset(1), 1e-12);
  EXPECT_NEAR(pred.mean[1], set.offset(2), 1e-12);
  EXPECT_NEAR(pred.variance[0], 2.1, 1e-8 * 2.1);
  EXPECT_NEAR(pred.variance[1], 2.1, 1e-8 * 2.1);
}

TEST(Blup, SinglePointCrossSeriesThroughPredictor) {
  const double y0 = 1.7, t0 = 0.5, a = 0.8, b = 0.6, s = 1.2;
  const auto p = MultiParams::from_pairwise({1.0, b, a, s, 1e-12});
  // Series 2 is far away so it carries no information about t0.
  std::vector<Observation> obs{{t0, 1, y0}, {t0 + 200.0, 1, 0.0}, {-300.0, 2, 0.0},
                               {-400.0, 2, 0.0}};
  const TimeSeriesSet set(obs, 2);
  const auto pred = blup_predict(kLRBF, p, set, {{t0, 2}});
  const double q = 1.0 + a * a;
  EXPECT_NEAR(pred.mean[0], y0 / std::sqrt(q) * std::exp(-b * s * s / q), 1e-9);
}

TEST(Blup, VarianceBoundedByPrior) {
  const auto set = small_set(3);
  const auto p = MultiParams::from_pairwise({1.5, 0.3, 1.0, 2.0, 0.2});
  Rng rng(4);
  std::vector<Point> q;
  for (int i = 0; i < 40; ++i) q.push_back({rng.uniform(-5, 15), 1 + static_cast<int>(rng.below(2))});
  const auto pred = blup_predict(kLExp, p, set, q);
  for (Eigen::Index i = 0; i < pred.variance.size(); ++i) {
    EXPECT_LE(pred.variance[i], 1.5 + 0.2 + 1e-8);
    EXPECT_GE(pred.variance[i], 0.0);
  }
}

TEST(Blup, LeaveOneOutMatchesDirectConditional) {
  const auto set = small_set(5);
  const auto p = MultiParams::from_pairwise({1.3, 0.4, 0.6, 0.8, 0.15});
  const auto all = points_of(set);
  const Eigen::MatrixXd K = covariance_matrix(kLExp, p, all, true);
  for (std::size_t k = 0; k < set.size(); ++k) {
    std::vector<Observation> rest;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (i != k) rest.push_back(set[i]);
    }
    const auto pred = blup_predict(kLExp, p, TimeSeriesSet(rest, 2), {all[k]});
    // Conditional of a Gaussian vector from the precision matrix.
    const Eigen::MatrixXd P = K.inverse();
    const auto kk = static_cast<Eigen::Index>(k);
    double mean = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (i != k) mean -= P(kk, static_cast<Eigen::Index>(i)) / P(kk, kk) * set[i].y;
    }
    EXPECT_NEAR(pred.mean[0], mean, 1e-8);
    EXPECT_NEAR(pred.variance[0], 1.0 / P(kk, kk), 1e-8);
  }
}

TEST(Blup, RejectsUnknownSeries) {
  const auto set = small_set(6);
  const auto p = MultiParams::from_pairwise({1.0, 1.0, 1.0, 0.0, 0.1});
  EXPECT_THROW(blup_predict(kLExp, p, set, {{0.0, 3}}), ArgumentError);
}

TEST(Mse, Examples) {
  std::vector<Observation> obs{{0, 1, 1.0}, {1, 1, 2.0}, {0, 2, 3.0}, {1, 2, 4.0}};
  const TimeSeriesSet truth(obs, 2);
  PredictionResult pred;
  pred.query = query_points(truth);
  pred.mean = truth.values();
  pred.variance = Eigen::VectorXd::Zero(4);
  EXPECT_EQ(mse(pred, truth), 0.0);
  pred.mean = truth.values().array() + 0.5;
  EXPECT_DOUBLE_EQ(mse(pred, truth), 0.25);

  std::vector<Observation> three{{0, 1, 0.0}, {1, 1, 0.0}, {2, 1, 0.0}, {0, 2, 0.0}, {1, 2, 0.0}};
  const TimeSeriesSet zero(three, 2);
  PredictionResult r;
  r.query = query_points(zero);
  r.mean = Eigen::VectorXd::Zero(5);
  r.mean << 1, -1, 2, 0, 0;
  r.variance = Eigen::VectorXd::Zero(5);
  EXPECT_DOUBLE_EQ(mse(r, zero, 1), 2.0);
  r.query.pop_back();
  EXPECT_THROW(mse(r, zero), ArgumentError);
}

TEST(SingleSeries, MatchesJointPredictorWithIndependentSeries) {
  const auto set = small_set(7);
  const auto first = set.series_observations(1);
  const SingleSeriesFit fit{1.2, 0.5, 0.1, 0.0, false};
  const auto alone = single_series_predict(kLExp, fit, first, {2.5, 3.5});
  // With a huge dissimilarity series 2 carries no information.
  const auto p = MultiParams::from_pairwise({1.2, 0.5, 1e8, 0.0, 0.1});
  const auto joint = blup_predict(kLExp, p, set, {{2.5, 1}, {3.5, 1}});
  EXPECT_NEAR(alone.mean[0], joint.mean[0], 1e-10);
  EXPECT_NEAR(alone.variance[1], joint.variance[1], 1e-10);
}
