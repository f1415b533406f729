#include "gplag/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "gplag/bayes.hpp"
#include "gplag/error.hpp"
#include "gplag/inference.hpp"
#include "gplag/predict.hpp"
#include "gplag/rng.hpp"
#include "gplag/simulate.hpp"

namespace gplag {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

class Overrides {
 public:
  Overrides(const std::map<std::string, double>& values, std::vector<std::string> allowed)
      : values_(values) {
    for (const auto& [key, v] : values) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ArgumentError("unknown override '" + key + "'");
      }
      if (!std::isfinite(v)) throw ArgumentError("override '" + key + "' is not finite");
    }
  }
  double get(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  int get_int(const std::string& key, int fallback) const {
    return static_cast<int>(std::lround(get(key, fallback)));
  }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

 private:
  std::map<std::string, double> values_;
};

// Runs task(i) for i in [0, count) on a small pool. Each task writes only its
// own slot, so no locking is needed beyond the shared counter.
void parallel_for(int count, int threads, const std::function<void(int)>& task) {
  const int workers = worker_count(threads, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& th : pool) th.join();
}

Json quartiles(const std::vector<double>& v) {
  if (v.empty()) return Json{{"median", nullptr}, {"q1", nullptr}, {"q3", nullptr}, {"iqr", nullptr}};
  const double q1 = quantile(v, 0.25);
  const double q3 = quantile(v, 0.75);
  return Json{{"median", quantile(v, 0.5)}, {"q1", q1}, {"q3", q3}, {"iqr", q3 - q1}};
}

double coefficient_of_variation(const std::vector<double>& v) {
  if (v.size() < 2) return kNaN;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::abs(mean);
}

// Smoothness exponent of the Matern-type families, NaN when the family has
// no sigma2 * b^(2 nu) microergodic combination.
double smoothness(const KernelSpec& spec) {
  switch (spec.family) {
    case Family::LExp: return 0.5;
    case Family::LMat: return spec.nu;
    default: return kNaN;
  }
}

struct Slot {
  std::vector<std::vector<std::string>> rows;
  bool failed = false;
};

template <typename Fn>
void guarded(Slot& slot, const std::vector<std::string>& prefix, std::size_t width, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    slot.failed = true;
    std::vector<std::string> row = prefix;
    row.resize(width - 1, "nan");
    row.push_back(std::string("failed: ") + e.what());
    slot.rows.push_back(std::move(row));
  }
}

void collect(ExperimentResult& out, std::vector<Slot>& slots) {
  for (auto& s : slots) {
    ++out.attempted;
    if (s.failed) ++out.failed;
    for (auto& r : s.rows) out.rows.push_back(std::move(r));
  }
}

FitConfig fit_config(const Overrides& ov, double s_lo, double s_hi, std::uint64_t seed) {
  FitConfig cfg;
  cfg.s_lo = ov.get("s_lo", s_lo);
  cfg.s_hi = ov.get("s_hi", s_hi);
  cfg.multistart_count = ov.get_int("multistart", cfg.multistart_count);
  cfg.seed = seed;
  return cfg;
}

// ---- recovery / consistency ------------------------------------------------

struct PairEstimate {
  PairwiseParams p;
  double loglik;
  bool converged;
};

PairEstimate simulate_and_fit(const KernelSpec& spec, const PairwiseParams& truth, int n,
                              double lo, double hi, const FitConfig& cfg, std::uint64_t seed) {
  const auto design = gen_time_design(n, 2, DesignStyle::JitteredGrid, {0.0, truth.s}, lo, hi,
                                      stream_seed(seed, 0));
  const auto data = sample_gplag(spec, MultiParams::from_pairwise(truth), design,
                                 stream_seed(seed, 1));
  const auto fit = fit_mle_pairwise(center_series(data), spec, cfg);
  return {fit.params.to_pairwise(), fit.loglik, fit.converged};
}

std::vector<std::string> estimate_row(std::vector<std::string> prefix, const PairEstimate& e) {
  for (double x : {e.p.a, e.p.b, e.p.s, e.p.sigma2, e.p.tau2, e.loglik}) prefix.push_back(fmt(x));
  prefix.push_back(e.converged ? "1" : "0");
  prefix.push_back("ok");
  return prefix;
}

Json truth_json(const PairwiseParams& t) {
  return Json{{"a", t.a}, {"b", t.b}, {"s", t.s}, {"sigma2", t.sigma2}, {"tau2", t.tau2}};
}

ExperimentResult run_recovery(const ExperimentSpec& spec) {
  const Overrides ov(spec.overrides,
                     {"a", "b", "s", "sigma2", "tau2", "n", "lo", "hi", "s_lo", "s_hi", "multistart"});
  const PairwiseParams truth{ov.get("sigma2", 4.0), ov.get("b", 0.3), ov.get("a", 1.0),
                             ov.get("s", 2.0), ov.get("tau2", 0.0)};
  const int n = ov.get_int("n", 100);
  const double lo = ov.get("lo", -n / 2.0);
  const double hi = ov.get("hi", n / 2.0);
  std::vector<KernelSpec> kernels = spec.kernels;
  if (kernels.empty()) {
    kernels = {{Family::LRBF, 1.5, 1.0}, {Family::LExp, 0.5, 1.0}, {Family::LMat, 1.5, 1.0}};
  }

  ExperimentResult out;
  out.header = {"replicate", "family", "n", "a", "b", "s", "sigma2", "tau2", "loglik",
                "converged", "status"};
  out.summary = Json{{"experiment", "recovery"}, {"seed", spec.seed}, {"n", n},
                     {"truth", truth_json(truth)}, {"families", Json::object()}};

  for (std::size_t k = 0; k < kernels.size(); ++k) {
    const KernelSpec ks = kernels[k];
    check_spec(ks);
    const std::uint64_t family_seed = stream_seed(spec.seed, 1000003ULL * (k + 1));
    std::vector<Slot> slots(spec.replicates);
    std::vector<PairEstimate> est(spec.replicates);
    parallel_for(spec.replicates, spec.threads, [&](int r) {
      const std::vector<std::string> prefix{std::to_string(r + 1), to_string(ks), std::to_string(n)};
      guarded(slots[r], prefix, out.header.size(), [&] {
        const auto seed = stream_seed(family_seed, static_cast<std::uint64_t>(r));
        est[r] = simulate_and_fit(ks, truth, n, lo, hi, fit_config(ov, 0.0, 4.0, seed), seed);
        slots[r].rows.push_back(estimate_row(prefix, est[r]));
      });
    });
    std::vector<double> a, b, s, s2, tau2, micro;
    const double nu = smoothness(ks);
    for (int r = 0; r < spec.replicates; ++r) {
      if (slots[r].failed) continue;
      const auto& p = est[r].p;
      a.push_back(p.a);
      b.push_back(p.b);
      s.push_back(p.s);
      s2.push_back(p.sigma2);
      tau2.push_back(p.tau2);
      if (!std::isnan(nu)) micro.push_back(p.sigma2 * std::pow(p.b, 2.0 * nu));
    }
    const int before = out.failed;
    collect(out, slots);
    Json fam{{"replicates", spec.replicates},
             {"failed", out.failed - before},
             {"a", quartiles(a)},
             {"b", quartiles(b)},
             {"s", quartiles(s)},
             {"sigma2", quartiles(s2)},
             {"tau2", quartiles(tau2)}};
    if (!micro.empty()) {
      fam["microergodic"] = Json{{"cv_sigma2", coefficient_of_variation(s2)},
                                 {"cv_sigma2_b2nu", coefficient_of_variation(micro)}};
    }
    out.summary["families"][to_string(ks)] = fam;
  }
  out.summary["attempted"] = out.attempted;
  out.summary["failed"] = out.failed;
  return out;
}

ExperimentResult run_consistency(const ExperimentSpec& spec) {
  const Overrides ov(spec.overrides,
                     {"a", "b", "s", "sigma2", "tau2", "n", "s_lo", "s_hi", "multistart"});
  const PairwiseParams truth{ov.get("sigma2", 4.0), ov.get("b", 0.3), ov.get("a", 1.0),
                             ov.get("s", 2.0), ov.get("tau2", 0.0)};
  std::vector<int> sizes{20, 50, 100, 200};
  if (ov.has("n")) sizes = {ov.get_int("n", 100)};
  const KernelSpec ks = spec.kernels.empty() ? KernelSpec{Family::LExp, 0.5, 1.0} : spec.kernels[0];
  check_spec(ks);

  ExperimentResult out;
  out.header = {"replicate", "n", "a", "b", "s", "sigma2", "tau2", "loglik", "converged", "status"};
  out.summary = Json{{"experiment", "consistency"}, {"seed", spec.seed}, {"family", to_string(ks)},
                     {"truth", truth_json(truth)}, {"sizes", Json::array()}};

  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const int n = sizes[k];
    const std::uint64_t size_seed = stream_seed(spec.seed, 7919ULL * (k + 1));
    std::vector<Slot> slots(spec.replicates);
    std::vector<PairEstimate> est(spec.replicates);
    parallel_for(spec.replicates, spec.threads, [&](int r) {
      const std::vector<std::string> prefix{std::to_string(r + 1), std::to_string(n)};
      guarded(slots[r], prefix, out.header.size(), [&] {
        const auto seed = stream_seed(size_seed, static_cast<std::uint64_t>(r));
        est[r] = simulate_and_fit(ks, truth, n, -n / 2.0, n / 2.0,
                                  fit_config(ov, 0.0, 4.0, seed), seed);
        slots[r].rows.push_back(estimate_row(prefix, est[r]));
      });
    });
    std::vector<double> a, s;
    for (int r = 0; r < spec.replicates; ++r) {
      if (slots[r].failed) continue;
      a.push_back(est[r].p.a);
      s.push_back(est[r].p.s);
    }
    const int before = out.failed;
    collect(out, slots);
    out.summary["sizes"].push_back(Json{{"n", n},
                                        {"failed", out.failed - before},
                                        {"a", quartiles(a)},
                                        {"s", quartiles(s)}});
  }
  out.summary["attempted"] = out.attempted;
  out.summary["failed"] = out.failed;
  return out;
}

// ---- prediction ------------------------------------------------------------

struct PredictionScore {
  double mse_gplag;
  double mse_single;
  double a;
  double s;
};

// GPlag on both training series against a single-series GP on series 2, both
// scored on the held-out series-2 points.
PredictionScore score_prediction(const KernelSpec& ks, const TimeSeriesSet& data,
                                 const FitConfig& cfg, std::uint64_t seed) {
  const auto split = train_test_split(data, 0.5, seed);
  const auto train = center_series(split.train);
  const auto fit = fit_mle_pairwise(train, ks, cfg);

  std::vector<Point> query;
  std::vector<double> query_times;
  std::vector<double> truth;
  for (const auto& o : split.test.observations()) {
    if (o.series != 2) continue;
    query.push_back({o.t, 2});
    query_times.push_back(o.t);
    truth.push_back(o.y + split.test.offset(2));
  }
  const auto joint = blup_predict(fit, train, query);

  const auto target = train.series_observations(2);
  const auto single = fit_single_series(target, ks, cfg);
  const auto alone = single_series_predict(ks, single, target, query_times);

  PredictionScore out{0.0, 0.0, fit.params.to_pairwise().a, fit.params.to_pairwise().s};
  const double offset = train.offset(2);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double r1 = joint.mean[ii] - truth[i];
    const double r2 = alone.mean[ii] + offset - truth[i];
    out.mse_gplag += r1 * r1;
    out.mse_single += r2 * r2;
  }
  out.mse_gplag /= static_cast<double>(truth.size());
  out.mse_single /= static_cast<double>(truth.size());
  return out;
}

ExperimentResult run_prediction(const ExperimentSpec& spec) {
  const Overrides ov(spec.overrides, {"a", "b", "s", "sigma2", "tau2", "n", "s_lo", "s_hi",
                                      "multistart", "linear"});
  const PairwiseParams truth{ov.get("sigma2", 4.0), ov.get("b", 1.0), ov.get("a", 0.3),
                             ov.get("s", 2.0), ov.get("tau2", 0.0)};
  const int n = ov.get_int("n", 50);
  const bool with_linear = ov.get_int("linear", 1) != 0;
  const KernelSpec ks = spec.kernels.empty() ? KernelSpec{Family::LExp, 0.5, 1.0} : spec.kernels[0];
  check_spec(ks);

  ExperimentResult out;
  out.header = {"replicate", "setting", "mse_gplag", "mse_single", "gplag_wins", "a", "s", "status"};
  out.summary = Json{{"experiment", "prediction"}, {"seed", spec.seed}, {"family", to_string(ks)},
                     {"truth", truth_json(truth)}, {"settings", Json::object()}};

  std::vector<std::string> settings{"kernel"};
  if (with_linear) settings.push_back("linear");
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const std::string setting = settings[k];
    const std::uint64_t setting_seed = stream_seed(spec.seed, 104729ULL * (k + 1));
    std::vector<Slot> slots(spec.replicates);
    std::vector<PredictionScore> scores(spec.replicates);
    parallel_for(spec.replicates, spec.threads, [&](int r) {
      const std::vector<std::string> prefix{std::to_string(r + 1), setting};
      guarded(slots[r], prefix, out.header.size(), [&] {
        const auto seed = stream_seed(setting_seed, static_cast<std::uint64_t>(r));
        TimeSeriesSet data = setting == "kernel"
            ? sample_gplag(ks, MultiParams::from_pairwise(truth),
                           gen_time_design(n, 2, DesignStyle::JitteredGrid, {0.0, truth.s},
                                           -n / 2.0, n / 2.0, stream_seed(seed, 0)),
                           stream_seed(seed, 1))
            : gen_linear_t_noise(101, 2.0, 3.0, 5.0, 20.0, 5.0, stream_seed(seed, 0));
        const auto& sc = scores[r] =
            score_prediction(ks, data, fit_config(ov, -1.0, 5.0, seed), stream_seed(seed, 2));
        slots[r].rows.push_back({prefix[0], setting, fmt(sc.mse_gplag), fmt(sc.mse_single),
                                 sc.mse_gplag < sc.mse_single ? "1" : "0", fmt(sc.a), fmt(sc.s),
                                 "ok"});
      });
    });
    std::vector<double> g, single;
    int wins = 0;
    for (int r = 0; r < spec.replicates; ++r) {
      if (slots[r].failed) continue;
      g.push_back(scores[r].mse_gplag);
      single.push_back(scores[r].mse_single);
      if (scores[r].mse_gplag < scores[r].mse_single) ++wins;
    }
    const int before = out.failed;
    collect(out, slots);
    const int scored = static_cast<int>(g.size());
    out.summary["settings"][setting] =
        Json{{"replicates", spec.replicates},
             {"failed", out.failed - before},
             {"gplag_wins", wins},
             {"win_rate", scored > 0 ? static_cast<double>(wins) / scored : 0.0},
             {"mse_gplag", quartiles(g)},
             {"mse_single", quartiles(single)}};
  }
  out.summary["attempted"] = out.attempted;
  out.summary["failed"] = out.failed;
  return out;
}

// ---- arctan clustering -----------------------------------------------------

const std::vector<double> kArctanK{0.01, 1.0, 10.0};
const std::vector<double> kArctanS{0.0, 0.5, 1.0};

std::vector<int> cluster(const std::vector<double>& scores, std::uint64_t seed) {
  return kmeans(scores, 3, seed).labels;
}

ExperimentResult run_arctan(const ExperimentSpec& spec) {
  const Overrides ov(spec.overrides, {"s_lo", "s_hi", "multistart", "gamma"});
  const double gamma = ov.get("gamma", 1.0);
  const KernelSpec ks = spec.kernels.empty() ? KernelSpec{Family::LExp, 0.5, 1.0} : spec.kernels[0];
  check_spec(ks);
  const FitConfig cfg = fit_config(ov, -1.0, 4.0, spec.seed);

  std::vector<int> truth;
  std::vector<std::string> ids;
  const auto pairs = arctan_pairs(&truth, &ids);

  std::vector<Slot> slots(pairs.size());
  std::vector<PairwiseParams> est(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), spec.threads, [&](int i) {
    guarded(slots[i], {ids[i], "gplag"}, 4, [&] {
      est[i] = fit_mle_pairwise(center_series(pairs[i]), ks, cfg).params.to_pairwise();
    });
  });

  ExperimentResult out;
  out.header = {"pair_id", "method", "score", "lag"};
  std::vector<BenchmarkRow> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!slots[i].failed) rows.push_back({ids[i], "gplag", est[i].a, est[i].s});
  }
  collect(out, slots);
  const auto base = run_benchmark(pairs, ids, gamma, cfg.s_lo, cfg.s_hi);
  rows.insert(rows.end(), base.begin(), base.end());
  for (const auto& r : rows) out.rows.push_back({r.pair_id, r.method, fmt(r.score), fmt(r.lag)});

  out.summary = Json{{"experiment", "arctan-cluster"}, {"seed", spec.seed},
                     {"family", to_string(ks)}, {"gamma", gamma}, {"methods", Json::object()}};
  for (const std::string method : {"gplag", "tlcc", "dtw", "soft-dtw", "soft-dtw-divergence"}) {
    std::vector<double> scores;
    for (const auto& r : rows) {
      if (r.method == method) scores.push_back(r.score);
    }
    if (scores.size() != pairs.size()) {
      out.summary["methods"][method] = Json{{"ari", nullptr}, {"nmi", nullptr}};
      continue;
    }
    const auto labels = cluster(scores, stream_seed(spec.seed, 31));
    out.summary["methods"][method] =
        Json{{"ari", ari(labels, truth)}, {"nmi", nmi(labels, truth)}, {"labels", labels}};
  }
  out.summary["truth"] = truth;
  out.summary["attempted"] = out.attempted;
  out.summary["failed"] = out.failed;
  return out;
}

// ---- three series ----------------------------------------------------------

ExperimentResult run_three_series(const ExperimentSpec& spec) {
  const Overrides ov(spec.overrides, {"a", "b", "s2", "s3", "sigma2", "tau2", "n", "s_lo", "s_hi",
                                      "multistart"});
  const double a = ov.get("a", 1.0);
  MultiParams truth;
  truth.sigma2 = ov.get("sigma2", 4.0);
  truth.b = ov.get("b", 0.3);
  truth.tau2 = ov.get("tau2", 0.0);
  truth.A = Eigen::MatrixXd::Constant(3, 3, a);
  truth.A.diagonal().setZero();
  truth.S = Eigen::Vector3d(0.0, ov.get("s2", 2.0), ov.get("s3", 4.0));
  const int n = ov.get_int("n", 50);
  const KernelSpec ks = spec.kernels.empty() ? KernelSpec{Family::LExp, 0.5, 1.0} : spec.kernels[0];
  check_spec(ks);

  ExperimentResult out;
  out.header = {"replicate", "a12", "a13", "a23", "s2", "s3", "b", "sigma2", "tau2", "loglik",
                "max_triangle_violation", "converged", "status"};
  std::vector<Slot> slots(spec.replicates);
  std::vector<FitResult> fits(spec.replicates);
  std::vector<double> violation(spec.replicates, 0.0);
  parallel_for(spec.replicates, spec.threads, [&](int r) {
    const std::vector<std::string> prefix{std::to_string(r + 1)};
    guarded(slots[r], prefix, out.header.size(), [&] {
      const auto seed = stream_seed(spec.seed, static_cast<std::uint64_t>(r));
      const std::vector<double> lags(truth.S.data(), truth.S.data() + 3);
      const auto design = gen_time_design(n, 3, DesignStyle::JitteredGrid, lags, -n / 2.0,
                                          n / 2.0, stream_seed(seed, 0));
      const auto data = sample_gplag(ks, truth, design, stream_seed(seed, 1));
      fits[r] = fit_mle_multi(center_series(data), ks, fit_config(ov, -1.0, 6.0, seed));
      const auto& A = fits[r].params.A;
      double worst = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) worst = std::max(worst, A(i, k) - A(i, j) - A(j, k));
      violation[r] = worst;
      const auto& p = fits[r].params;
      slots[r].rows.push_back({prefix[0], fmt(A(0, 1)), fmt(A(0, 2)), fmt(A(1, 2)), fmt(p.S[1]),
                               fmt(p.S[2]), fmt(p.b), fmt(p.sigma2), fmt(p.tau2),
                               fmt(fits[r].loglik), fmt(worst), fits[r].converged ? "1" : "0",
                               "ok"});
    });
  });
  std::vector<double> a12, a13, a23, s2, s3;
  double worst = 0.0;
  for (int r = 0; r < spec.replicates; ++r) {
    if (slots[r].failed) continue;
    const auto& p = fits[r].params;
    a12.push_back(p.A(0, 1));
    a13.push_back(p.A(0, 2));
    a23.push_back(p.A(1, 2));
    s2.push_back(p.S[1]);
    s3.push_back(p.S[2]);
    worst = std::max(worst, violation[r]);
  }
  collect(out, slots);
  out.summary = Json{{"experiment", "three-series"},
                     {"seed", spec.seed},
                     {"family", to_string(ks)},
                     {"n", n},
                     {"truth", kernel_to_json(ks, truth)},
                     {"a12", quartiles(a12)},
                     {"a13", quartiles(a13)},
                     {"a23", quartiles(a23)},
                     {"s2", quartiles(s2)},
                     {"s3", quartiles(s3)},
                     {"max_triangle_violation", worst},
                     {"attempted", out.attempted},
                     {"failed", out.failed}};
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"recovery", "consistency", "prediction",
                                              "arctan-cluster", "three-series"};
  return names;
}

int worker_count(int requested, int tasks) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("GPLAG_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, std::min(n, std::max(tasks, 1)));
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.replicates < 1) throw ArgumentError("replicates must be at least 1");
  if (spec.name == "recovery") return run_recovery(spec);
  if (spec.name == "consistency") return run_consistency(spec);
  if (spec.name == "prediction") return run_prediction(spec);
  if (spec.name == "arctan-cluster") return run_arctan(spec);
  if (spec.name == "three-series") return run_three_series(spec);
  throw ArgumentError("unknown experiment '" + spec.name + "'");
}

void write_experiment(const ExperimentResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(std::filesystem::path(dir) / "replicates.csv");
  if (!csv) throw std::runtime_error("cannot write to " + dir);
  for (std::size_t i = 0; i < result.header.size(); ++i) {
    csv << (i ? "," : "") << result.header[i];
  }
  csv << '\n';
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << csv_field(row[i]);
    csv << '\n';
  }
  std::ofstream js(std::filesystem::path(dir) / "summary.json");
  if (!js) throw std::runtime_error("cannot write to " + dir);
  js << result.summary.dump(2) << '\n';
}

std::vector<TimeSeriesSet> arctan_pairs(std::vector<int>* truth, std::vector<std::string>* ids) {
  constexpr int kPoints = 50;
  const auto t = regular_grid(kPoints, -2.0, 2.0);
  const auto target = gen_arctan(0.01, 0.0, kPoints, -2.0, 2.0);
  std::vector<TimeSeriesSet> pairs;
  if (truth) truth->clear();
  if (ids) ids->clear();
  for (std::size_t ki = 0; ki < kArctanK.size(); ++ki) {
    for (double s : kArctanS) {
      const auto feature = gen_arctan(kArctanK[ki], s, kPoints, -2.0, 2.0);
      std::vector<Observation> obs;
      for (int i = 0; i < kPoints; ++i) {
        obs.push_back({t[i], 1, target[i]});
        obs.push_back({t[i], 2, feature[i]});
      }
      std::ostringstream label;
      label << "k=" << kArctanK[ki] << ",s=" << s;
      pairs.emplace_back(std::move(obs), 2, std::vector<std::string>{"target", label.str()});
      if (truth) truth->push_back(static_cast<int>(ki));
      if (ids) ids->push_back(label.str());
    }
  }
  return pairs;
}

std::vector<BenchmarkRow> run_benchmark(const std::vector<TimeSeriesSet>& pairs,
                                        const std::vector<std::string>& ids, double gamma,
                                        double lag_lo, double lag_hi) {
  if (pairs.size() != ids.size()) throw ArgumentError("one id per pair required");
  if (!(gamma > 0.0)) throw ArgumentError("gamma must be positive");
  std::vector<BenchmarkRow> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto first = pairs[i].series_observations(1);
    const auto second = pairs[i].series_observations(2);
    std::vector<double> x, y;
    for (const auto& o : first) x.push_back(o.y);
    for (const auto& o : second) y.push_back(o.y);
    const auto scan = tlcc(first, second, tlcc_grid(lag_lo, lag_hi, 0.25 * median_spacing(first)));
    rows.push_back({ids[i], "tlcc", scan.best_corr, scan.best_lag});
    rows.push_back({ids[i], "dtw", dtw(x, y).distance, kNaN});
    rows.push_back({ids[i], "soft-dtw", soft_dtw(x, y, gamma), kNaN});
    rows.push_back({ids[i], "soft-dtw-divergence", soft_dtw_divergence(x, y, gamma), kNaN});
  }
  return rows;
}

}  // namespace gplag
