#include "gplag/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gplag/baselines.hpp"
#include "gplag/error.hpp"
#include "gplag/linalg.hpp"
#include "gplag/optimize.hpp"

namespace gplag {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd values_of(const std::vector<Observation>& obs) {
  Eigen::VectorXd y(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) y[i] = obs[i].y;
  return y;
}

std::vector<Point> points_of(const std::vector<Observation>& obs) {
  std::vector<Point> pts;
  pts.reserve(obs.size());
  for (const auto& o : obs) pts.push_back({o.t, o.series});
  return pts;
}

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

Box default_box(const ParamLayout& layout, const FitConfig& config) {
  const int n = layout.size();
  Box box{Eigen::VectorXd::Constant(n, std::log(config.positive_floor)),
          Eigen::VectorXd::Constant(n, std::log(config.positive_ceiling))};
  for (int l = 1; l < layout.num_series; ++l) {
    box.lower[layout.lag(l)] = config.s_lo;
    box.upper[layout.lag(l)] = config.s_hi;
  }
  return box;
}

std::vector<ActiveConstraint> bound_report(const ParamLayout& layout, const Eigen::VectorXd& x,
                                           const Box& box) {
  std::vector<ActiveConstraint> out;
  const int L = layout.num_series;
  auto check = [&](int idx, const std::string& name, std::vector<int> ids, bool log_scale) {
    if (box.lower[idx] == box.upper[idx]) return;
    const double v = log_scale ? std::exp(x[idx]) : x[idx];
    if (x[idx] <= box.lower[idx]) out.push_back({"lower_bound", name, ids, v});
    if (x[idx] >= box.upper[idx]) out.push_back({"upper_bound", name, ids, v});
  };
  check(layout.log_sigma2(), "sigma2", {}, true);
  check(layout.log_b(), "b", {}, true);
  for (int i = 0; i < L; ++i) {
    for (int j = i + 1; j < L; ++j) {
      const std::string name =
          L == 2 ? "a" : "a(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
      check(layout.log_a(i, j), name, {i + 1, j + 1}, true);
    }
  }
  for (int l = 1; l < L; ++l) {
    check(layout.lag(l), L == 2 ? "s" : "s" + std::to_string(l + 1), {l + 1}, false);
  }
  check(layout.log_tau2(), "tau2", {}, true);
  return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> v;
  if (count <= 0) return v;
  if (count == 1) return {0.5 * (lo + hi)};
  for (int k = 0; k < count; ++k) v.push_back(lo + (hi - lo) * k / (count - 1));
  return v;
}

// Triangle penalty sum over every (edge, detour) pair and its gradient in
// log a coordinates.
double triangle_penalty(const ParamLayout& layout, const Eigen::VectorXd& theta,
                        Eigen::VectorXd* grad) {
  const int L = layout.num_series;
  auto a = [&](int i, int j) { return std::exp(theta[layout.log_a(i, j)]); };
  double total = 0.0;
  for (int l = 0; l < L; ++l) {
    for (int k = l + 1; k < L; ++k) {
      for (int m = 0; m < L; ++m) {
        if (m == l || m == k) continue;
        const double alk = a(l, k), alm = a(l, m), amk = a(m, k);
        const double gap = alk - alm - amk;
        if (gap <= 0.0) continue;
        total += gap * gap;
        if (grad) {
          (*grad)[layout.log_a(l, k)] += 2.0 * gap * alk;
          (*grad)[layout.log_a(l, m)] -= 2.0 * gap * alm;
          (*grad)[layout.log_a(m, k)] -= 2.0 * gap * amk;
        }
      }
    }
  }
  return total;
}

TimeSeriesSet pair_subset(const TimeSeriesSet& set, int first, int second) {
  std::vector<Observation> obs;
  for (const auto& o : set.observations()) {
    if (o.series == first) obs.push_back({o.t, 1, o.y});
    if (o.series == second) obs.push_back({o.t, 2, o.y});
  }
  return TimeSeriesSet(std::move(obs), 2,
                       {set.labels()[first - 1], set.labels()[second - 1]},
                       {set.offset(first), set.offset(second)});
}

}  // namespace

int ParamLayout::log_a(int i, int j) const {
  if (i > j) std::swap(i, j);
  // Row-major position of (i, j) in the strict upper triangle.
  return 2 + i * num_series - i * (i + 1) / 2 + (j - i - 1);
}

Eigen::VectorXd ParamLayout::pack(const MultiParams& p) const {
  Eigen::VectorXd theta(size());
  theta[log_sigma2()] = std::log(p.sigma2);
  theta[log_b()] = std::log(p.b);
  for (int i = 0; i < num_series; ++i) {
    for (int j = i + 1; j < num_series; ++j) theta[log_a(i, j)] = std::log(p.A(i, j));
  }
  for (int l = 1; l < num_series; ++l) theta[lag(l)] = p.S[l] - p.S[0];
  theta[log_tau2()] = std::log(p.tau2);
  return theta;
}

MultiParams ParamLayout::unpack(const Eigen::VectorXd& theta) const {
  MultiParams p;
  p.sigma2 = std::exp(theta[log_sigma2()]);
  p.b = std::exp(theta[log_b()]);
  p.tau2 = std::exp(theta[log_tau2()]);
  p.A = Eigen::MatrixXd::Zero(num_series, num_series);
  p.S = Eigen::VectorXd::Zero(num_series);
  for (int i = 0; i < num_series; ++i) {
    for (int j = i + 1; j < num_series; ++j) p.A(i, j) = p.A(j, i) = std::exp(theta[log_a(i, j)]);
  }
  for (int l = 1; l < num_series; ++l) p.S[l] = theta[lag(l)];
  return p;
}

double log_marginal_likelihood(const KernelSpec& spec, const MultiParams& params,
                               const std::vector<Point>& points, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd K = covariance_matrix(spec, params, points, true);
  const auto fac = factorize_with_jitter(K, params.sigma2);
  const Eigen::VectorXd alpha = fac.solve(y);
  const auto n = static_cast<double>(y.size());
  return -0.5 * n * kLog2Pi - 0.5 * fac.log_det() - 0.5 * y.dot(alpha);
}

double log_marginal_likelihood(const KernelSpec& spec, const MultiParams& params,
                               const TimeSeriesSet& set) {
  return log_marginal_likelihood(spec, params, points_of(set), set.values());
}

double log_marginal_likelihood(const KernelSpec& spec, const PairwiseParams& params,
                               const TimeSeriesSet& set) {
  return log_marginal_likelihood(spec, MultiParams::from_pairwise(params), set);
}

LikelihoodValue loglik_with_gradient(const KernelSpec& spec, const ParamLayout& layout,
                                     const Eigen::VectorXd& theta,
                                     const std::vector<Point>& points,
                                     const Eigen::VectorXd& y) {
  const MultiParams p = layout.unpack(theta);
  const Eigen::MatrixXd K = covariance_matrix(spec, p, points, true);
  const auto fac = factorize_with_jitter(K, p.sigma2);
  const Eigen::VectorXd alpha = fac.solve(y);
  const auto n = static_cast<Eigen::Index>(y.size());

  LikelihoodValue out;
  out.jitter = fac.jitter;
  out.loglik = -0.5 * static_cast<double>(n) * kLog2Pi - 0.5 * fac.log_det() - 0.5 * y.dot(alpha);

  // d loglik / d theta_k = 1/2 tr(W dK/dtheta_k), W = alpha alpha^T - K^{-1}.
  Eigen::MatrixXd W = fac.llt.solve(Eigen::MatrixXd::Identity(n, n));
  W = alpha * alpha.transpose() - W;

  out.grad = Eigen::VectorXd::Zero(layout.size());
  double g_sigma = 0.0, g_b = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const int lj = points[j].series - 1;
    for (Eigen::Index i = j; i < n; ++i) {
      const int li = points[i].series - 1;
      const double a = p.A(li, lj);
      const double a2 = a * a;
      const double d = points[i].t - points[j].t + p.S[li] - p.S[lj];
      const auto k = kernel_partials(spec, p.sigma2, p.b, a2, d);
      const double w = (i == j ? 0.5 : 1.0) * W(i, j);
      g_sigma += w * k.value;
      g_b += w * k.d_b;
      if (li != lj) {
        out.grad[layout.log_a(li, lj)] += w * 2.0 * a2 * k.d_a2;
        if (li > 0) out.grad[layout.lag(li)] += w * k.d_lag;
        if (lj > 0) out.grad[layout.lag(lj)] -= w * k.d_lag;
      }
    }
  }
  out.grad[layout.log_sigma2()] = g_sigma;
  out.grad[layout.log_b()] = g_b * p.b;
  out.grad[layout.log_tau2()] = 0.5 * p.tau2 * W.trace();
  return out;
}

Eigen::VectorXd nll_gradient(const KernelSpec& spec, const MultiParams& params,
                             const TimeSeriesSet& set) {
  const ParamLayout layout{params.num_series()};
  for (const auto& v : validate_params(params, 0.0)) {
    if (v.constraint == "positivity") {
      throw ValidationError("gradient needs strictly positive parameters: " + v.message);
    }
  }
  if (params.tau2 <= 0.0) throw ValidationError("gradient needs tau2 > 0 (log coordinates)");
  const auto pts = points_of(set);
  const Eigen::VectorXd y = set.values();
  const Eigen::VectorXd theta = layout.pack(params);
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta[k]));
    Eigen::VectorXd up = theta, down = theta;
    up[k] += h;
    down[k] -= h;
    const double fu = log_marginal_likelihood(spec, layout.unpack(up), pts, y);
    const double fd = log_marginal_likelihood(spec, layout.unpack(down), pts, y);
    if (!std::isfinite(fu) || !std::isfinite(fd)) {
      throw NumericalError("non-finite likelihood at a finite-difference probe");
    }
    g[k] = -(fu - fd) / (2.0 * h);
  }
  return g;
}

Eigen::VectorXd nll_gradient(const KernelSpec& spec, const PairwiseParams& params,
                             const TimeSeriesSet& set) {
  return nll_gradient(spec, MultiParams::from_pairwise(params), set);
}

SingleSeriesFit fit_single_series(const std::vector<Observation>& obs, const KernelSpec& spec,
                                  const FitConfig& config) {
  std::vector<Observation> single = obs;
  for (auto& o : single) o.series = 1;
  const Eigen::VectorXd y = values_of(single);
  const double var = std::max(sample_variance(y), 1e-12);
  const double spacing = median_spacing(single);

  SingleSeriesFit fallback{var, 1.0 / (spacing * spacing), 0.1 * var, kNaN, true};
  if (single.size() < 3) return fallback;

  const ParamLayout layout{2};
  MultiParams start = MultiParams::from_pairwise({fallback.sigma2, fallback.b, 1.0, 0.0,
                                                  fallback.tau2});
  Box box = default_box(layout, config);
  // a and s do not enter a single-series likelihood.
  box.lower[layout.log_a(0, 1)] = box.upper[layout.log_a(0, 1)] = 0.0;
  box.lower[layout.lag(1)] = box.upper[layout.lag(1)] = 0.0;
  const auto pts = points_of(single);

  const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    try {
      const auto v = loglik_with_gradient(spec, layout, x, pts, y);
      g = -v.grad;
      return -v.loglik;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  try {
    OptimizerOptions opt;
    opt.max_iter = config.max_iter;
    opt.grad_tol = config.grad_tol;
    const auto res = minimize_box_lbfgs(f, layout.pack(start), box.lower, box.upper, opt);
    if (!std::isfinite(res.value)) return fallback;
    const auto p = layout.unpack(res.x);
    return {p.sigma2, p.b, p.tau2, -res.value, false};
  } catch (const std::exception&) {
    return fallback;
  }
}

std::vector<double> tlcc_grid(double s_lo, double s_hi, double spacing) {
  if (!(s_hi > s_lo)) return {s_lo};
  const double span = s_hi - s_lo;
  const int steps = std::clamp(static_cast<int>(std::ceil(span / spacing - 1e-9)), 1, 400);
  return linspace(s_lo, s_hi, steps + 1);
}

Initialization initialize(const TimeSeriesSet& set, const KernelSpec& spec,
                          const FitConfig& config) {
  if (set.num_series() != 2) throw ArgumentError("initialize expects exactly 2 series");
  const auto first = set.series_observations(1);
  const auto ss = fit_single_series(first, spec, config);
  Initialization init;
  init.used_fallback = ss.used_fallback;
  init.params.sigma2 = ss.sigma2;
  init.params.b = ss.b;
  init.params.tau2 = std::max(ss.tau2, config.positive_floor);
  init.params.a = 1.0;

  const auto grid = tlcc_grid(config.s_lo, config.s_hi, 0.25 * median_spacing(first));
  const auto scan = tlcc(first, set.series_observations(2), grid);
  init.tlcc_lag = scan.best_lag;
  init.params.s = std::isfinite(scan.best_corr)
                      ? std::clamp(scan.best_lag, config.s_lo, config.s_hi)
                      : std::clamp(0.0, config.s_lo, config.s_hi);
  return init;
}

namespace {

struct RunOutcome {
  OptimizerResult opt;
  Eigen::VectorXd theta;
  double loglik;
};

OptimizerOptions optimizer_options(const FitConfig& config) {
  OptimizerOptions opt;
  opt.max_iter = config.max_iter;
  opt.grad_tol = config.grad_tol;
  return opt;
}

void check_fit_config(const FitConfig& config) {
  if (!(config.s_lo < config.s_hi)) throw ArgumentError("s bounds need s_lo < s_hi");
  if (!(config.positive_floor > 0.0)) throw ArgumentError("positive_floor must be > 0");
  if (config.multistart_count < 1) throw ArgumentError("multistart_count must be >= 1");
}

}  // namespace

FitResult fit_mle_pairwise(const TimeSeriesSet& set, const KernelSpec& spec,
                           const FitConfig& config) {
  check_spec(spec);
  check_fit_config(config);
  if (set.num_series() != 2) throw ArgumentError("pairwise fit expects exactly 2 series");
  if (set.size() < 6) throw ArgumentError("pairwise fit needs at least 6 observations");

  const Initialization init = initialize(set, spec, config);
  const ParamLayout layout{2};
  const Box box = default_box(layout, config);
  const auto pts = points_of(set);
  const Eigen::VectorXd y = set.values();

  std::vector<double> s_starts{init.params.s};
  for (double s : linspace(config.s_lo, config.s_hi, config.multistart_count - 1)) {
    s_starts.push_back(s);
  }

  const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    try {
      const auto v = loglik_with_gradient(spec, layout, x, pts, y);
      g = -v.grad;
      return -v.loglik;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  FitResult result;
  result.spec = spec;
  result.init_fallback = init.used_fallback;
  result.init_loglik = kNaN;
  int best = -1;
  Eigen::VectorXd best_x;
  OptimizerResult best_opt;
  for (std::size_t k = 0; k < s_starts.size(); ++k) {
    PairwiseParams p0 = init.params;
    p0.s = s_starts[k];
    const Eigen::VectorXd x0 =
        project_box(layout.pack(MultiParams::from_pairwise(p0)), box.lower, box.upper);
    StartDiagnostic diag{s_starts[k], kNaN, 0, false, ""};
    try {
      const auto res = minimize_box_lbfgs(f, x0, box.lower, box.upper, optimizer_options(config));
      if (k == 0) result.init_loglik = -res.history.front();
      diag.loglik = -res.value;
      diag.iterations = res.iterations;
      diag.converged = res.converged;
      diag.message = res.message;
      if (std::isfinite(res.value) && (best < 0 || -res.value > result.loglik)) {
        best = static_cast<int>(k);
        result.loglik = -res.value;
        best_x = res.x;
        best_opt = res;
      }
    } catch (const std::exception& e) {
      diag.message = e.what();
    }
    result.starts.push_back(diag);
  }
  if (best < 0) {
    std::string msg = "all starts failed:";
    for (const auto& d : result.starts) msg += " [s0=" + std::to_string(d.s_start) + ": " + d.message + "]";
    throw OptimizationError(msg);
  }
  result.params = layout.unpack(best_x);
  result.start_used = best;
  result.iterations = best_opt.iterations;
  result.converged = best_opt.converged;
  result.constraint_report = bound_report(layout, best_x, box);
  for (double v : best_opt.history) result.history.push_back(-v);
  return result;
}

Eigen::MatrixXd metric_closure(Eigen::MatrixXd A) {
  const Eigen::Index L = A.rows();
  for (Eigen::Index m = 0; m < L; ++m) {
    for (Eigen::Index i = 0; i < L; ++i) {
      for (Eigen::Index j = 0; j < L; ++j) {
        if (i == j) continue;
        const double via = A(i, m) + A(m, j);
        if (via < A(i, j)) A(i, j) = via;
      }
    }
  }
  return A;
}

FitResult fit_mle_multi(const TimeSeriesSet& set, const KernelSpec& spec,
                        const FitConfig& config) {
  check_spec(spec);
  check_fit_config(config);
  const int L = set.num_series();
  if (L < 3) throw ArgumentError("multi-series fit expects at least 3 series");
  for (int l = 1; l <= L; ++l) {
    if (set.count(l) < 6) throw ArgumentError("each series needs at least 6 observations");
  }

  const ParamLayout layout{L};
  const Box box = default_box(layout, config);
  const auto pts = points_of(set);
  const Eigen::VectorXd y = set.values();
  const auto first = set.series_observations(1);
  const auto ss = fit_single_series(first, spec, config);

  // Start 0: TLCC lags against series 1, unit dissimilarities.
  MultiParams tlcc_start;
  tlcc_start.sigma2 = ss.sigma2;
  tlcc_start.b = ss.b;
  tlcc_start.tau2 = std::max(ss.tau2, config.positive_floor);
  tlcc_start.A = Eigen::MatrixXd::Ones(L, L);
  tlcc_start.A.diagonal().setZero();
  tlcc_start.S = Eigen::VectorXd::Zero(L);
  const auto grid = tlcc_grid(config.s_lo, config.s_hi, 0.25 * median_spacing(first));
  for (int l = 2; l <= L; ++l) {
    const auto scan = tlcc(first, set.series_observations(l), grid);
    tlcc_start.S[l - 1] = std::isfinite(scan.best_corr)
                              ? std::clamp(scan.best_lag, config.s_lo, config.s_hi)
                              : std::clamp(0.0, config.s_lo, config.s_hi);
  }

  // Start 1: pairwise MLEs, lags relative to series 1, A closed to a metric.
  std::vector<MultiParams> starts{tlcc_start};
  try {
    MultiParams pw = tlcc_start;
    for (int i = 1; i <= L; ++i) {
      for (int j = i + 1; j <= L; ++j) {
        const auto fit = fit_mle_pairwise(pair_subset(set, i, j), spec, config);
        const auto pp = fit.params.to_pairwise();
        pw.A(i - 1, j - 1) = pw.A(j - 1, i - 1) = std::max(pp.a, config.positive_floor);
        if (i == 1) pw.S[j - 1] = pp.s;
      }
    }
    pw.A = metric_closure(pw.A);
    starts.push_back(pw);
  } catch (const std::exception&) {
    // TLCC start alone.
  }

  FitResult result;
  result.spec = spec;
  result.init_fallback = ss.used_fallback;
  int best = -1;
  Eigen::VectorXd best_x;
  std::vector<double> best_history;
  int best_iters = 0;
  bool best_converged = false;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    StartDiagnostic diag{starts[k].S.size() > 1 ? starts[k].S[1] : 0.0, kNaN, 0, false, ""};
    try {
      Eigen::VectorXd x = project_box(layout.pack(starts[k]), box.lower, box.upper);
      if (k == 0) result.init_loglik = log_marginal_likelihood(spec, layout.unpack(x), pts, y);
      double weight = config.penalty.initial_weight;
      int iters = 0;
      OptimizerResult res;
      std::vector<double> history;
      for (int round = 0; round < std::max(1, config.penalty.rounds); ++round) {
        const Objective f = [&, weight](const Eigen::VectorXd& th, Eigen::VectorXd& g) {
          try {
            const auto v = loglik_with_gradient(spec, layout, th, pts, y);
            g = -v.grad;
            Eigen::VectorXd pg = Eigen::VectorXd::Zero(th.size());
            const double pen = triangle_penalty(layout, th, &pg);
            g += weight * pg;
            return -v.loglik + weight * pen;
          } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
          }
        };
        res = minimize_box_lbfgs(f, x, box.lower, box.upper, optimizer_options(config));
        x = res.x;
        iters += res.iterations;
        history.insert(history.end(), res.history.begin(), res.history.end());
        weight *= config.penalty.growth;
      }
      MultiParams p = layout.unpack(x);
      if (!validate_params(p, 0.0).empty()) {
        p.A = metric_closure(p.A);
        x = project_box(layout.pack(p), box.lower, box.upper);
        p = layout.unpack(x);
      }
      const double ll = log_marginal_likelihood(spec, p, pts, y);
      diag.loglik = ll;
      diag.iterations = iters;
      diag.converged = res.converged;
      diag.message = res.message;
      if (std::isfinite(ll) && (best < 0 || ll > result.loglik)) {
        best = static_cast<int>(k);
        result.loglik = ll;
        best_x = x;
        best_history = history;
        best_iters = iters;
        best_converged = res.converged;
      }
    } catch (const std::exception& e) {
      diag.message = e.what();
    }
    result.starts.push_back(diag);
  }
  if (best < 0) throw OptimizationError("all multi-series starts failed");

  result.params = layout.unpack(best_x);
  result.start_used = best;
  result.iterations = best_iters;
  result.converged = best_converged;
  result.constraint_report = bound_report(layout, best_x, box);
  for (double v : best_history) result.history.push_back(-v);
  for (int l = 0; l < L; ++l) {
    for (int k = l + 1; k < L; ++k) {
      for (int m = 0; m < L; ++m) {
        if (m == l || m == k) continue;
        const double gap = result.params.A(l, k) - result.params.A(l, m) - result.params.A(m, k);
        if (std::abs(gap) <= 1e-8) {
          result.constraint_report.push_back(
              {"triangle", "a(" + std::to_string(l + 1) + "," + std::to_string(k + 1) + ")",
               {l + 1, m + 1, k + 1}, gap});
        }
      }
    }
  }
  const auto violations = validate_params(result.params, 1e-8);
  if (!violations.empty()) {
    std::string msg = "final point infeasible:";
    for (const auto& v : violations) msg += " " + v.message + ";";
    throw OptimizationError(msg);
  }
  return result;
}

FitResult fit_mle(const TimeSeriesSet& set, const KernelSpec& spec, const FitConfig& config) {
  return set.num_series() == 2 ? fit_mle_pairwise(set, spec, config)
                               : fit_mle_multi(set, spec, config);
}

}  // namespace gplag
