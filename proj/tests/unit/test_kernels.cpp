#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "gplag/error.hpp"
#include "gplag/kernels.hpp"
#include "gplag/linalg.hpp"
#include "gplag/rng.hpp"
#include "oracles.hpp"

using namespace gplag;

namespace {

const KernelSpec kLRBF{Family::LRBF, 1.5, 1.0};
const KernelSpec kLExp{Family::LExp, 0.5, 1.0};
const KernelSpec kLMat{Family::LMat, 1.5, 1.0};

std::vector<KernelSpec> every_spec() {
  return {kLRBF,
          kLExp,
          kLMat,
          {Family::LMat, 2.5, 1.0},
          {Family::GneitingMatern, 1.5, 0.5},
          {Family::GneitingExpSep, 0.5, 0.7},
          {Family::LaplaceScaled, 1.5, 1.0},
          {Family::RationalQuadratic, 1.5, 1.0},
          {Family::ComplexExponential, 1.5, 1.0}};
}

// Dissimilarities as distances between random points in the plane, so every
// triangle inequality holds and a^2 is conditionally negative definite.
MultiParams random_params(Rng& rng, int L) {
  MultiParams p;
  p.sigma2 = rng.uniform(0.5, 5.0);
  p.b = rng.uniform(0.1, 2.0);
  p.tau2 = 0.0;
  std::vector<Eigen::Vector2d> pos;
  for (int l = 0; l < L; ++l) pos.emplace_back(rng.uniform(0, 2), rng.uniform(0, 2));
  p.A = Eigen::MatrixXd::Zero(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) p.A(i, j) = (pos[i] - pos[j]).norm();
  p.S = Eigen::VectorXd::Zero(L);
  for (int l = 1; l < L; ++l) p.S[l] = rng.uniform(-3, 3);
  return p;
}

std::vector<Point> random_points(Rng& rng, int n, int L) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back({rng.uniform(0, 20), 1 + static_cast<int>(rng.below(L))});
  }
  return pts;
}

}  // namespace

TEST(KernelEval, SameSeriesAtZeroDistanceIsVariance) {
  PairwiseParams p{4.0, 0.3, 1.0, 2.0, 0.0};
  EXPECT_DOUBLE_EQ(kernel_eval(kLRBF, p, {1.5, 2}, {1.5, 2}), 4.0);
  EXPECT_DOUBLE_EQ(kernel_eval(kLRBF, p, {-3.0, 1}, {-3.0, 1}), 4.0);
}

TEST(KernelEval, CrossSeriesAtExactLag) {
  PairwiseParams p{4.0, 0.3, 1.0, 2.0, 0.0};
  EXPECT_NEAR(kernel_eval(kLRBF, p, {3.0, 1}, {1.0, 2}), 4.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(kernel_eval(kLRBF, p, {3.0, 1}, {1.0, 2}), 2.828427, 1e-6);
}

TEST(KernelEval, ZeroDissimilarityIsShiftedStationaryKernel) {
  PairwiseParams p{2.5, 0.7, 0.0, 1.3, 0.0};
  for (double dt : {-2.0, -0.4, 0.0, 0.9, 3.1}) {
    const double expected = 2.5 * std::exp(-0.7 * (dt - 1.3) * (dt - 1.3));
    EXPECT_NEAR(kernel_eval(kLRBF, p, {dt, 1}, {0.0, 2}), expected, 1e-14);
    for (const auto& spec : {kLExp, kLMat}) {
      const double same = kernel_eval(spec, p, {dt - 1.3, 1}, {0.0, 1});
      EXPECT_DOUBLE_EQ(kernel_eval(spec, p, {dt, 1}, {0.0, 2}), same);
    }
  }
}

TEST(KernelEval, LargeDissimilarityDecorrelates) {
  PairwiseParams p{3.0, 0.5, 1e8, 1.0, 0.0};
  for (const auto& spec : every_spec()) {
    EXPECT_LE(std::abs(kernel_eval(spec, p, {1.0, 1}, {0.0, 2})), 1e-7 * 3.0) << to_string(spec);
  }
}

TEST(KernelEval, MaternZeroLagLimit) {
  PairwiseParams p{2.0, 0.8, 0.6, 0.5, 0.0};
  for (double nu : {0.5, 1.5, 2.5}) {
    const KernelSpec spec{Family::LMat, nu, 1.0};
    const double v = kernel_eval(spec, p, {0.5, 1}, {0.0, 2});
    EXPECT_NEAR(v, 2.0 / std::pow(1.36, nu + 0.5), 1e-14);
  }
}

TEST(KernelEval, RejectsInvalidInput) {
  PairwiseParams p{1.0, 1.0, 1.0, 0.0, 0.0};
  EXPECT_THROW(kernel_eval({Family::LMat, 1.0, 1.0}, p, {0, 1}, {1, 2}), ArgumentError);
  EXPECT_THROW(kernel_eval({Family::GneitingMatern, 1.5, 0.0}, p, {0, 1}, {1, 2}), ArgumentError);
  PairwiseParams bad = p;
  bad.sigma2 = -1.0;
  EXPECT_THROW(kernel_eval(kLExp, bad, {0, 1}, {1, 2}), ValidationError);
  bad = p;
  bad.a = -0.1;
  EXPECT_THROW(kernel_eval(kLExp, bad, {0, 1}, {1, 2}), ValidationError);
  bad = p;
  bad.b = 0.0;
  EXPECT_THROW(kernel_eval(kLExp, bad, {0, 1}, {1, 2}), ValidationError);
}

TEST(KernelEval, SemiStationaryAndSymmetric) {
  Rng rng(3);
  for (const auto& spec : every_spec()) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto p = random_params(rng, 3);
      const Point x{rng.uniform(-5, 5), 1 + static_cast<int>(rng.below(3))};
      const Point y{rng.uniform(-5, 5), 1 + static_cast<int>(rng.below(3))};
      const double h = rng.uniform(-50, 50);
      const double k = kernel_eval(spec, p, x, y);
      const double shifted = kernel_eval(spec, p, {x.t + h, x.series}, {y.t + h, y.series});
      EXPECT_NEAR(shifted, k, 1e-12 * std::max(1.0, std::abs(k))) << to_string(spec);
      EXPECT_EQ(kernel_eval(spec, p, y, x), k) << to_string(spec);
    }
  }
}

TEST(KernelEval, TwoSeriesReductionMatchesPairwiseFormulas) {
  const PairwiseParams p{4.0, 0.3, 1.2, 2.0, 0.0};
  const auto m = MultiParams::from_pairwise(p);
  const double q = 1.0 + 1.44;
  for (double t : {-1.0, 0.0, 0.5, 2.0, 4.5}) {
    const double d = t - 0.0 - 2.0;  // (t, 1) against (0, 2)
    EXPECT_EQ(kernel_eval(kLRBF, m, {t, 1}, {0.0, 2}),
              4.0 / std::sqrt(q) * std::exp(-0.3 * d * d / q));
    EXPECT_EQ(kernel_eval(kLExp, m, {t, 1}, {0.0, 2}), 4.0 / q * std::exp(-0.3 * std::abs(d)));
    const double r = 0.3 * std::abs(d);
    EXPECT_NEAR(kernel_eval(kLMat, m, {t, 1}, {0.0, 2}),
                4.0 / std::pow(q, 2.0) * (1.0 + r) * std::exp(-r), 1e-15);
    EXPECT_EQ(kernel_eval(kLExp, m, {t, 1}, {0.0, 2}), kernel_eval(kLExp, p, {t, 1}, {0.0, 2}));
  }
}

TEST(KernelEval, MonotoneDecayInLag) {
  for (const auto& spec : {kLRBF, kLExp, kLMat, KernelSpec{Family::LMat, 2.5, 1.0}}) {
    double prev = kernel_value(spec, 2.0, 0.7, 0.5, 0.0);
    for (double d = 0.05; d < 15.0; d += 0.05) {
      const double v = kernel_value(spec, 2.0, 0.7, 0.5, d);
      EXPECT_LE(v, prev + 1e-15) << to_string(spec) << " d=" << d;
      EXPECT_DOUBLE_EQ(kernel_value(spec, 2.0, 0.7, 0.5, -d), v);
      prev = v;
    }
  }
}

TEST(KernelPartials, MatchFiniteDifferences) {
  for (const auto& spec : every_spec()) {
    for (double d : {-2.3, -0.4, 0.7, 1.9}) {
      const double s2 = 1.7, b = 0.6, a2 = 0.8, h = 1e-6;
      const auto k = kernel_partials(spec, s2, b, a2, d);
      EXPECT_DOUBLE_EQ(k.value, kernel_value(spec, s2, b, a2, d));
      auto fd = [&](auto f) { return (f(h) - f(-h)) / (2 * h); };
      EXPECT_NEAR(k.d_b, fd([&](double e) { return kernel_value(spec, s2, b + e, a2, d); }), 1e-7);
      EXPECT_NEAR(k.d_a2, fd([&](double e) { return kernel_value(spec, s2, b, a2 + e, d); }), 1e-7);
      EXPECT_NEAR(k.d_lag, fd([&](double e) { return kernel_value(spec, s2, b, a2, d + e); }), 1e-7);
    }
  }
}

TEST(CovarianceMatrix, SinglePoint) {
  PairwiseParams p{2.0, 1.0, 1.0, 0.0, 0.5};
  const auto K = covariance_matrix(kLExp, MultiParams::from_pairwise(p),
                                   std::vector<Point>{{0.0, 1}}, true);
  ASSERT_EQ(K.rows(), 1);
  EXPECT_DOUBLE_EQ(K(0, 0), 2.5);
}

TEST(CovarianceMatrix, TwoPointsExponential) {
  PairwiseParams p{1.0, 1.0, 1.0, 0.0, 0.0};
  const auto K = covariance_matrix(kLExp, MultiParams::from_pairwise(p),
                                   std::vector<Point>{{0.0, 1}, {1.0, 1}}, true);
  EXPECT_DOUBLE_EQ(K(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(K(1, 1), 1.0);
  EXPECT_NEAR(K(0, 1), 0.367879441171442, 1e-15);
  EXPECT_EQ(K(0, 1), K(1, 0));
}

TEST(CovarianceMatrix, PositiveSemidefiniteOnRandomDesigns) {
  Rng rng(17);
  for (const auto& spec : every_spec()) {
    if (spec.family == Family::ComplexExponential) continue;
    for (int trial = 0; trial < 20; ++trial) {
      const int L = 2 + static_cast<int>(rng.below(2));
      const auto p = random_params(rng, L);
      const auto K = covariance_matrix(spec, p, random_points(rng, 50, L), false);
      EXPECT_TRUE(K.isApprox(K.transpose(), 0.0));
      const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues()[0];
      EXPECT_GE(min_eig, -1e-8 * p.sigma2) << to_string(spec) << " trial " << trial;
    }
  }
}

// The cross term decays in lag faster than the same-series term, so its
// spectrum is wider and the cross-spectral matrix loses definiteness at high
// frequency. A fine two-series grid exposes a negative eigenvalue.
TEST(CovarianceMatrix, ComplexExponentialIsIndefinite) {
  const KernelSpec spec{Family::ComplexExponential, 1.5, 1.0};
  const auto p = MultiParams::from_pairwise({1.0, 0.1, 2.0, 0.0, 0.0});
  std::vector<Point> pts;
  for (int i = 0; i < 40; ++i) {
    pts.push_back({0.1 * i, 1});
    pts.push_back({0.1 * i, 2});
  }
  const auto K = covariance_matrix(spec, p, pts, false);
  EXPECT_LT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues()[0], -1e-8);
}

TEST(SpectralDensity, ExponentialAtZeroFrequency) {
  PairwiseParams p{3.0, 0.8, 0.0, 1.0, 0.0};
  const auto rho = spectral_density(kLExp, MultiParams::from_pairwise(p), 0.0, 1, 1);
  EXPECT_NEAR(rho.real(), 3.0 * std::sqrt(2.0 / std::numbers::pi) / 0.8, 1e-14);
  EXPECT_EQ(rho.imag(), 0.0);
}

TEST(SpectralDensity, GaussianClosedForm) {
  PairwiseParams p{2.0, 1.5, 0.0, 0.0, 0.0};
  for (double w : {0.0, 1.0, 3.0}) {
    const auto rho = spectral_density(kLRBF, MultiParams::from_pairwise(p), w, 1, 1);
    EXPECT_NEAR(rho.real(), 2.0 / std::sqrt(3.0) * std::exp(-w * w / 6.0), 1e-14);
  }
}

TEST(SpectralDensity, MatchesNumericalTransform) {
  const PairwiseParams p{2.0, 3.0, 0.7, 1.5, 0.0};
  const auto m = MultiParams::from_pairwise(p);
  for (const auto& spec : {kLRBF, kLExp, kLMat}) {
    for (int l = 1; l <= 2; ++l) {
      for (int lp = 1; lp <= 2; ++lp) {
        const double shift = m.S[l - 1] - m.S[lp - 1];
        auto f = [&](double t) { return kernel_eval(spec, m, {t, l}, {0.0, lp}); };
        for (double w = -10.0; w <= 10.0; w += 2.5) {
          const auto num = oracle::fourier_transform(f, w, 40.0, {-shift}, 4000);
          const auto exact = spectral_density(spec, m, w, l, lp);
          EXPECT_LE(std::abs(num - exact), 1e-4 * std::abs(exact))
              << to_string(spec) << " w=" << w << " l=" << l << " l'=" << lp;
        }
      }
    }
  }
}

TEST(SpectralDensity, CrossPhaseFollowsLag) {
  const PairwiseParams p{1.0, 1.0, 0.5, 2.0, 0.0};
  const auto m = MultiParams::from_pairwise(p);
  for (double w : {0.3, 0.7, 1.1}) {
    const auto r12 = spectral_density(kLExp, m, w, 1, 2);
    const auto r21 = spectral_density(kLExp, m, w, 2, 1);
    const double diff = std::remainder(std::arg(r21) - std::arg(r12) - 2.0 * w * 2.0,
                                       2.0 * std::numbers::pi);
    EXPECT_NEAR(diff, 0.0, 1e-12);
    EXPECT_NEAR(std::abs(r12 - std::conj(r21)), 0.0, 1e-15);
  }
}

TEST(SpectralDensity, UnsupportedFamily) {
  const auto m = MultiParams::from_pairwise({1.0, 1.0, 0.5, 2.0, 0.0});
  EXPECT_THROW(spectral_density({Family::RationalQuadratic, 1.5, 1.0}, m, 1.0, 1, 2),
               ArgumentError);
}

TEST(ValidateParams, TriangleBoundaryIsAllowed) {
  MultiParams p;
  p.A = (Eigen::Matrix3d() << 0, 1, 2, 1, 0, 1, 2, 1, 0).finished();
  p.S = Eigen::Vector3d(0, 1, 2);
  EXPECT_TRUE(validate_params(p).empty());
}

TEST(ValidateParams, TriangleViolation) {
  MultiParams p;
  p.A = (Eigen::Matrix3d() << 0, 1, 3, 1, 0, 1, 3, 1, 0).finished();
  p.S = Eigen::Vector3d(0, 1, 2);
  const auto v = validate_params(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, "triangle");
  EXPECT_EQ(v[0].indices, (std::vector<int>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(v[0].amount, 1.0);
}

TEST(ValidateParams, BaselineLagMustBeZero) {
  MultiParams p;
  p.A = (Eigen::Matrix3d() << 0, 1, 1, 1, 0, 1, 1, 1, 0).finished();
  p.S = Eigen::Vector3d(0.5, 0, 1);
  const auto v = validate_params(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, "baseline_lag");
}

TEST(ValidateParams, StructuralViolations) {
  MultiParams p;
  p.A = (Eigen::Matrix3d() << 0.1, 1, 1, 1.5, 0, 0, 1, 0, 0).finished();
  p.S = Eigen::Vector3d(0, 1, 2);
  p.sigma2 = -1.0;
  std::vector<std::string> kinds;
  for (const auto& v : validate_params(p)) kinds.push_back(v.constraint);
  auto has = [&](const std::string& k) {
    return std::find(kinds.begin(), kinds.end(), k) != kinds.end();
  };
  EXPECT_TRUE(has("positivity"));
  EXPECT_TRUE(has("zero_diagonal"));
  EXPECT_TRUE(has("symmetry"));
  EXPECT_TRUE(validate_params(PairwiseParams{1, 1, 0, 0, 0}).empty());
  EXPECT_EQ(validate_params(PairwiseParams{1, 1, -1, 0, 0}).size(), 1u);
}

TEST(FamilyNames, RoundTrip) {
  for (Family f : all_families()) EXPECT_EQ(parse_family(family_name(f)), f);
  EXPECT_THROW(parse_family("gaussian"), ArgumentError);
  EXPECT_EQ(to_string(kLMat), "lmat(nu=1.5)");
}

TEST(Jitter, EscalatesAndReports) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Ones(3, 3);
  const auto f = factorize_with_jitter(K, 1.0);
  EXPECT_GT(f.jitter, 0.0);
  EXPECT_LE(f.jitter, 1e-2);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
  bad(2, 2) = -1.0;
  EXPECT_THROW(factorize_with_jitter(bad, 1.0), NumericalError);
  const auto ok = factorize_with_jitter(Eigen::MatrixXd::Identity(2, 2), 1.0);
  EXPECT_EQ(ok.jitter, 0.0);
}
