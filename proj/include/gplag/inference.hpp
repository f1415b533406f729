#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gplag/data.hpp"
#include "gplag/kernels.hpp"

namespace gplag {

struct PenaltySchedule {
  double initial_weight = 10.0;
  double growth = 10.0;
  int rounds = 4;
};

struct FitConfig {
  double s_lo = -5.0;
  double s_hi = 5.0;
  double positive_floor = 1e-6;
  double positive_ceiling = 1e8;
  int max_iter = 500;
  double grad_tol = 1e-6;
  int multistart_count = 5;
  PenaltySchedule penalty;
  std::uint64_t seed = 0;
};

/// Layout of the unconstrained parameter vector for L series:
/// [log sigma2, log b, log a_ij (i<j, row-major), S[2..L], log tau2].
struct ParamLayout {
  int num_series;

  int size() const { return 3 + num_pairs() + (num_series - 1); }
  int num_pairs() const { return num_series * (num_series - 1) / 2; }
  int log_sigma2() const { return 0; }
  int log_b() const { return 1; }
  int log_a(int i, int j) const;  // 0-based series, i != j
  int lag(int l) const { return 2 + num_pairs() + (l - 1); }  // 0-based l >= 1
  int log_tau2() const { return size() - 1; }

  Eigen::VectorXd pack(const MultiParams& p) const;
  MultiParams unpack(const Eigen::VectorXd& theta) const;
};

/// Exact Gaussian log marginal likelihood of the data under the kernel,
/// via a (jittered) Cholesky factor.
double log_marginal_likelihood(const KernelSpec& spec, const MultiParams& params,
                               const TimeSeriesSet& set);
double log_marginal_likelihood(const KernelSpec& spec, const PairwiseParams& params,
                               const TimeSeriesSet& set);
double log_marginal_likelihood(const KernelSpec& spec, const MultiParams& params,
                               const std::vector<Point>& points, const Eigen::VectorXd& y);

struct LikelihoodValue {
  double loglik;
  Eigen::VectorXd grad;  // d loglik / d theta in ParamLayout order
  double jitter;
};

/// Log likelihood and its analytic gradient in the transformed coordinates.
LikelihoodValue loglik_with_gradient(const KernelSpec& spec, const ParamLayout& layout,
                                     const Eigen::VectorXd& theta,
                                     const std::vector<Point>& points, const Eigen::VectorXd& y);

/// Gradient of the negative log likelihood in ParamLayout coordinates by
/// central differences with step 1e-5 * max(1, |theta_k|).
Eigen::VectorXd nll_gradient(const KernelSpec& spec, const MultiParams& params,
                             const TimeSeriesSet& set);
Eigen::VectorXd nll_gradient(const KernelSpec& spec, const PairwiseParams& params,
                             const TimeSeriesSet& set);

struct SingleSeriesFit {
  double sigma2;
  double b;
  double tau2;
  double loglik;
  bool used_fallback;
};

/// MLE of (sigma2, b, tau2) for one series (a and s play no role).
SingleSeriesFit fit_single_series(const std::vector<Observation>& obs, const KernelSpec& spec,
                                  const FitConfig& config);

struct Initialization {
  PairwiseParams params;
  bool used_fallback = false;
  double tlcc_lag = 0.0;
};

/// Starting point: single-series GP on series 1 for (sigma2, b, tau2), TLCC
/// lag clamped to the s bounds, a = 1.
Initialization initialize(const TimeSeriesSet& set, const KernelSpec& spec,
                          const FitConfig& config);

/// Lag grid over [s_lo, s_hi] used for TLCC initialisation.
std::vector<double> tlcc_grid(double s_lo, double s_hi, double spacing);

struct ActiveConstraint {
  std::string name;          // "lower_bound", "upper_bound", "triangle"
  std::string parameter;     // e.g. "a", "s", "a(1,3)"
  std::vector<int> indices;  // 1-based series ids
  double value;
};

struct StartDiagnostic {
  double s_start;
  double loglik;  // NaN when the start failed
  int iterations;
  bool converged;
  std::string message;
};

struct FitResult {
  MultiParams params;
  KernelSpec spec;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<ActiveConstraint> constraint_report;
  int start_used = 0;
  std::vector<StartDiagnostic> starts;
  bool init_fallback = false;
  double init_loglik = 0.0;
  std::vector<double> history;  // accepted log likelihoods of the chosen start

  bool pairwise() const { return params.num_series() == 2; }
};

/// Pairwise MLE with multistart over s. Throws OptimizationError when every
/// start fails.
FitResult fit_mle_pairwise(const TimeSeriesSet& set, const KernelSpec& spec,
                           const FitConfig& config);

/// L >= 3 MLE; triangle inequalities on A via an escalating exterior penalty.
FitResult fit_mle_multi(const TimeSeriesSet& set, const KernelSpec& spec,
                        const FitConfig& config);

/// Dispatches on the number of series.
FitResult fit_mle(const TimeSeriesSet& set, const KernelSpec& spec, const FitConfig& config);

/// Shortest-path closure of A, making every triangle inequality hold while
/// only lowering entries.
Eigen::MatrixXd metric_closure(Eigen::MatrixXd A);

}  // namespace gplag
