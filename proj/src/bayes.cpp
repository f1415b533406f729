#include "gplag/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "gplag/baselines.hpp"
#include "gplag/error.hpp"
#include "gplag/rng.hpp"

namespace gplag {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double InverseGamma::log_pdf(double x) const {
  if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double GaussianPrior::log_pdf(double x) const {
  if (!std::isfinite(x)) return kNegInf;
  const double z = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * z * z / variance;
}

void PriorSpec::validate() const {
  for (const auto* ig : {&a, &b, &sigma2, &tau2}) {
    if (!(ig->shape > 0.0 && ig->scale > 0.0)) {
      throw ArgumentError("inverse-gamma shape and scale must be > 0");
    }
  }
  if (!(s.variance > 0.0) || !std::isfinite(s.mean)) {
    throw ArgumentError("lag prior needs finite mean and variance > 0");
  }
}

PriorSpec PriorSpec::defaults_for(const TimeSeriesSet& set, const KernelSpec& spec,
                                  const FitConfig& config) {
  (void)spec;
  PriorSpec p;
  p.sigma2 = {2.0, std::max(sample_variance(set.values()), 1e-12)};
  const auto first = set.series_observations(1);
  const auto grid = tlcc_grid(config.s_lo, config.s_hi, 0.25 * median_spacing(first));
  const auto scan = tlcc(first, set.series_observations(2), grid);
  const double width = (config.s_hi - config.s_lo) / 4.0;
  p.s = {std::isfinite(scan.best_corr) ? scan.best_lag : 0.5 * (config.s_lo + config.s_hi),
         width * width};
  return p;
}

double log_prior(const PairwiseParams& p, const PriorSpec& priors) {
  return priors.a.log_pdf(p.a) + priors.b.log_pdf(p.b) + priors.s.log_pdf(p.s) +
         priors.sigma2.log_pdf(p.sigma2) + priors.tau2.log_pdf(p.tau2);
}

double log_posterior(const PairwiseParams& p, const PriorSpec& priors, const KernelSpec& spec,
                     const TimeSeriesSet& set) {
  const double lp = log_prior(p, priors);
  if (!std::isfinite(lp)) return kNegInf;
  return lp + log_marginal_likelihood(spec, p, set);
}

namespace {

PairwiseParams from_z(const Eigen::Matrix<double, 5, 1>& z) {
  return {std::exp(z[kSigma2]), std::exp(z[kB]), std::exp(z[kA]), z[kS], std::exp(z[kTau2])};
}

Eigen::Matrix<double, 5, 1> to_z(const PairwiseParams& p) {
  Eigen::Matrix<double, 5, 1> z;
  z[kA] = std::log(p.a);
  z[kB] = std::log(p.b);
  z[kS] = p.s;
  z[kSigma2] = std::log(p.sigma2);
  z[kTau2] = std::log(p.tau2);
  return z;
}

}  // namespace

PosteriorSamples sample_posterior(const TimeSeriesSet* set, const KernelSpec& spec,
                                  const PriorSpec& priors, const SamplerConfig& config) {
  priors.validate();
  check_spec(spec);
  if (config.num_draws < 100) throw ArgumentError("need at least 100 draws");
  if (config.burn_in < 0) throw ArgumentError("burn-in must be >= 0");
  if (config.use_likelihood && set == nullptr) throw ArgumentError("no data to condition on");

  PairwiseParams start;
  if (config.start) {
    start = *config.start;
  } else if (config.use_likelihood) {
    start = initialize(*set, spec, config.fit).params;
  } else {
    start = {priors.sigma2.scale / (priors.sigma2.shape + 1.0),
             priors.b.scale / (priors.b.shape + 1.0), priors.a.scale / (priors.a.shape + 1.0),
             priors.s.mean, priors.tau2.scale / (priors.tau2.shape + 1.0)};
  }
  start.tau2 = std::max(start.tau2, config.fit.positive_floor);
  start.a = std::max(start.a, config.fit.positive_floor);

  using Vec5 = Eigen::Matrix<double, 5, 1>;
  using Mat5 = Eigen::Matrix<double, 5, 5>;
  auto target = [&](const Vec5& z) {
    const PairwiseParams p = from_z(z);
    double lp = log_prior(p, priors);
    if (!std::isfinite(lp)) return kNegInf;
    // Jacobian of the log transform on the positive coordinates.
    lp += z[kA] + z[kB] + z[kSigma2] + z[kTau2];
    if (config.use_likelihood) {
      try {
        lp += log_marginal_likelihood(spec, p, *set);
      } catch (const NumericalError&) {
        return kNegInf;
      }
    }
    return std::isfinite(lp) ? lp : kNegInf;
  };

  Vec5 free_mask;
  int num_free = 0;
  for (int k = 0; k < 5; ++k) {
    free_mask[k] = config.fixed[k] ? 0.0 : 1.0;
    num_free += config.fixed[k] ? 0 : 1;
  }
  if (num_free == 0) throw ArgumentError("every coordinate is fixed");

  Rng rng(config.seed);
  Vec5 z = to_z(start);
  double lz = target(z);
  if (!std::isfinite(lz)) throw SamplerError("posterior is not finite at the start point");

  Mat5 chol = Mat5::Zero();
  for (int k = 0; k < 5; ++k) chol(k, k) = 0.1 * free_mask[k];
  double log_scale = 0.0;
  std::vector<Vec5> burn;
  burn.reserve(static_cast<std::size_t>(config.burn_in));
  const int covariance_switch = config.burn_in / 2;

  PosteriorSamples out;
  out.seed = config.seed;
  out.draws.resize(config.num_draws, 5);
  long accepted = 0;
  const long total = static_cast<long>(config.burn_in) + config.num_draws;
  for (long it = 0; it < total; ++it) {
    Vec5 eps;
    for (int k = 0; k < 5; ++k) eps[k] = rng.normal();
    const Vec5 prop = z + std::exp(log_scale) * (chol * eps).cwiseProduct(free_mask);
    const double lp = target(prop);
    const double log_ratio = lp - lz;
    const bool accept = std::isfinite(lp) && std::log(rng.uniform() + 1e-300) < log_ratio;
    if (accept) {
      z = prop;
      lz = lp;
    }
    if (it < config.burn_in) {
      const double prob = std::isfinite(lp) ? std::min(1.0, std::exp(std::min(0.0, log_ratio))) : 0.0;
      const double rate = 1.0 / std::pow(static_cast<double>(it % std::max(1, covariance_switch)) + 1.0, 0.6);
      log_scale += rate * (prob - config.target_acceptance);
      log_scale = std::clamp(log_scale, -15.0, 5.0);
      burn.push_back(z);
      if (it + 1 == covariance_switch && covariance_switch >= 20) {
        // Empirical covariance of the first half of burn-in.
        Vec5 mean = Vec5::Zero();
        for (const auto& v : burn) mean += v;
        mean /= static_cast<double>(burn.size());
        Mat5 cov = Mat5::Zero();
        for (const auto& v : burn) cov += (v - mean) * (v - mean).transpose();
        cov /= static_cast<double>(burn.size() - 1);
        for (int k = 0; k < 5; ++k) {
          cov(k, k) += 1e-10;
          if (config.fixed[k]) {
            cov.row(k).setZero();
            cov.col(k).setZero();
            cov(k, k) = 1.0;
          }
        }
        Eigen::LLT<Mat5> llt(cov * (2.38 * 2.38 / num_free));
        if (llt.info() == Eigen::Success) {
          chol = llt.matrixL();
          log_scale = 0.0;
        }
      }
    } else {
      accepted += accept ? 1 : 0;
      const PairwiseParams p = from_z(z);
      out.draws(it - config.burn_in, kA) = p.a;
      out.draws(it - config.burn_in, kB) = p.b;
      out.draws(it - config.burn_in, kS) = p.s;
      out.draws(it - config.burn_in, kSigma2) = p.sigma2;
      out.draws(it - config.burn_in, kTau2) = p.tau2;
      const Vec5 exact{start.a, start.b, start.s, start.sigma2, start.tau2};
      for (int k = 0; k < 5; ++k) {
        if (config.fixed[k]) out.draws(it - config.burn_in, k) = exact[k];
      }
    }
  }
  out.acceptance_rate = static_cast<double>(accepted) / config.num_draws;
  if (out.acceptance_rate < 0.01) {
    throw SamplerError("acceptance rate " + std::to_string(out.acceptance_rate) +
                       " below 0.01 after adaptation");
  }
  return out;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw ArgumentError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::array<ParamSummary, 5> summarize(const PosteriorSamples& samples) {
  if (samples.draws.rows() < 100) throw ArgumentError("summaries need at least 100 draws");
  std::array<ParamSummary, 5> out{};
  for (int k = 0; k < 5; ++k) {
    std::vector<double> col(samples.draws.col(k).data(),
                            samples.draws.col(k).data() + samples.draws.rows());
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(col.size());
    out[k] = {mean, quantile(col, 0.5), quantile(col, 0.025), quantile(col, 0.975)};
  }
  return out;
}

}  // namespace gplag
