#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gplag/data.hpp"
#include "gplag/inference.hpp"
#include "gplag/kernels.hpp"

namespace gplag {

/// Inverse-gamma with shape alpha and scale beta:
/// pdf(x) = beta^alpha / Gamma(alpha) x^(-alpha-1) exp(-beta/x).
struct InverseGamma {
  double shape;
  double scale;
  double log_pdf(double x) const;
};

struct GaussianPrior {
  double mean;
  double variance;
  double log_pdf(double x) const;
};

struct PriorSpec {
  InverseGamma a{2.0, 1.0};
  InverseGamma b{2.0, 1.0};
  InverseGamma sigma2{2.0, 1.0};
  InverseGamma tau2{2.0, 1.0};
  GaussianPrior s{0.0, 1.0};

  /// IG(2,1) for a, b, tau2; IG(2, var(y)) for sigma2; s ~ N(TLCC lag,
  /// ((s_hi - s_lo)/4)^2).
  static PriorSpec defaults_for(const TimeSeriesSet& set, const KernelSpec& spec,
                                const FitConfig& config);
  void validate() const;  // throws ArgumentError
};

/// Parameter order of draws: a, b, s, sigma2, tau2.
enum BayesParam { kA = 0, kB = 1, kS = 2, kSigma2 = 3, kTau2 = 4 };
inline constexpr std::array<const char*, 5> kBayesNames = {"a", "b", "s", "sigma2", "tau2"};

/// Normalised log prior plus log marginal likelihood. Nonpositive values
/// where positivity is required give -infinity.
double log_prior(const PairwiseParams& p, const PriorSpec& priors);
double log_posterior(const PairwiseParams& p, const PriorSpec& priors, const KernelSpec& spec,
                     const TimeSeriesSet& set);

struct SamplerConfig {
  int num_draws = 2000;
  int burn_in = 1000;
  std::uint64_t seed = 0;
  double target_acceptance = 0.234;
  bool use_likelihood = true;        // false samples the prior alone
  std::array<bool, 5> fixed{};       // coordinates held at the start value
  std::optional<PairwiseParams> start;  // default: initialize()
  FitConfig fit;                     // used for the default start
};

struct PosteriorSamples {
  Eigen::MatrixXd draws;  // num_draws x 5
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
};

/// Adaptive random-walk Metropolis over (log a, log b, s, log sigma2,
/// log tau2) with the log-Jacobian in the target. The proposal scale adapts
/// during burn-in toward the target acceptance and is frozen afterwards.
/// `set` may be null only when use_likelihood is false.
PosteriorSamples sample_posterior(const TimeSeriesSet* set, const KernelSpec& spec,
                                  const PriorSpec& priors, const SamplerConfig& config);

struct ParamSummary {
  double mean;
  double median;
  double q025;
  double q975;
};

/// Per-column summaries (empirical quantiles, linear interpolation).
std::array<ParamSummary, 5> summarize(const PosteriorSamples& samples);

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> v, double p);

}  // namespace gplag
