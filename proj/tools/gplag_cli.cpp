#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gplag/bayes.hpp"
#include "gplag/data.hpp"
#include "gplag/error.hpp"
#include "gplag/experiments.hpp"
#include "gplag/inference.hpp"
#include "gplag/predict.hpp"
#include "gplag/rng.hpp"
#include "gplag/serialize.hpp"
#include "gplag/simulate.hpp"

using namespace gplag;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kDegraded = 2;

struct KernelFlags {
  std::string family = "lexp";
  double nu = 1.5;
  double c = 1.0;

  void add(CLI::App* app) {
    app->add_option("--family", family, "kernel family")->capture_default_str();
    app->add_option("--nu", nu, "smoothness for lmat and gneiting-matern (0.5, 1.5, 2.5)")
        ->capture_default_str();
    app->add_option("--c", c, "separability constant for the Gneiting families")
        ->capture_default_str();
  }
  KernelSpec spec() const {
    KernelSpec k{parse_family(family), nu, c};
    if (k.family == Family::LExp) k.nu = 0.5;
    check_spec(k);
    return k;
  }
};

// Writes to `path`, or stdout when it is empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write(out);
  if (!out) throw std::runtime_error("failed writing " + path);
}

struct QueryTable {
  std::vector<Point> points;
  std::vector<double> y;  // NaN where absent
};

QueryTable read_query(const std::string& path, const TimeSeriesSet& train) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty query file");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
      if (!c.empty() && c.back() == '\r') c.pop_back();
      cols.push_back(c);
    }
  }
  int it = -1, is = -1, iy = -1;
  for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
    if (cols[i] == "t") it = i;
    if (cols[i] == "series") is = i;
    if (cols[i] == "y") iy = i;
  }
  if (it < 0 || is < 0) throw FormatError("query file needs t and series columns");
  QueryTable q;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) f.push_back(c);
    if (f.size() != cols.size()) throw ParseError("wrong number of fields", row);
    double t = 0.0;
    try {
      std::size_t used = 0;
      t = std::stod(f[it], &used);
      if (used != f[it].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("bad time value", row);
    }
    const int id = train.id_of(f[is]);
    if (id < 0) throw ParseError("series '" + f[is] + "' is not in the training data", row);
    q.points.push_back({t, id});
    q.y.push_back(iy >= 0 && !f[iy].empty() ? std::stod(f[iy]) : std::nan(""));
  }
  return q;
}

int cmd_fit(const std::string& data, const KernelFlags& kf, const FitConfig& cfg,
            const std::string& out) {
  const auto set = center_series(load_csv(data));
  const auto fit = fit_mle(set, kf.spec(), cfg);
  emit(out, [&](std::ostream& os) { os << fit_to_json(fit).dump(2) << '\n'; });
  if (!fit.converged) {
    std::cerr << "warning: optimizer did not converge\n";
    return kDegraded;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lead-lag Gaussian process models for time series"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "maximum likelihood fit of a CSV data set");
  std::string fit_data, fit_out;
  KernelFlags fit_kernel;
  FitConfig fit_cfg;
  fit->add_option("--data", fit_data, "t,series,y CSV")->required();
  fit_kernel.add(fit);
  fit->add_option("--s-lo", fit_cfg.s_lo, "lower bound on lags")->capture_default_str();
  fit->add_option("--s-hi", fit_cfg.s_hi, "upper bound on lags")->capture_default_str();
  fit->add_option("--multistart", fit_cfg.multistart_count, "number of lag starts")
      ->capture_default_str();
  fit->add_option("--max-iter", fit_cfg.max_iter)->capture_default_str();
  fit->add_option("--seed", fit_cfg.seed)->capture_default_str();
  fit->add_option("--out", fit_out, "result JSON (default stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a named simulation preset");
  ExperimentSpec exp_spec;
  std::vector<std::string> exp_families, exp_sets;
  double exp_nu = 1.5, exp_c = 1.0;
  std::string exp_out = "results";
  exp->add_option("name", exp_spec.name, "recovery, consistency, prediction, arctan-cluster, three-series")
      ->required()
      ->check(CLI::IsMember(experiment_names()));
  exp->add_option("--replicates", exp_spec.replicates)->capture_default_str()->check(CLI::PositiveNumber);
  exp->add_option("--seed", exp_spec.seed)->capture_default_str();
  exp->add_option("--family", exp_families, "kernel family (repeatable)");
  exp->add_option("--nu", exp_nu)->capture_default_str();
  exp->add_option("--c", exp_c)->capture_default_str();
  exp->add_option("--set", exp_sets, "override, e.g. --set n=50 (repeatable)");
  exp->add_option("--threads", exp_spec.threads, "worker threads (default GPLAG_THREADS)");
  exp->add_option("--out", exp_out, "output directory")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a two-series data set from a kernel");
  KernelFlags sim_kernel;
  PairwiseParams sim_p{4.0, 0.3, 1.0, 2.0, 0.0};
  int sim_n = 100;
  double sim_lo = std::nan(""), sim_hi = std::nan("");
  std::string sim_design = "jittered", sim_out;
  std::uint64_t sim_seed = 1;
  sim_kernel.add(sim);
  sim->add_option("--b", sim_p.b)->capture_default_str();
  sim->add_option("--a", sim_p.a)->capture_default_str();
  sim->add_option("--s", sim_p.s)->capture_default_str();
  sim->add_option("--sigma2", sim_p.sigma2)->capture_default_str();
  sim->add_option("--tau2", sim_p.tau2)->capture_default_str();
  sim->add_option("--n", sim_n, "points per series")->capture_default_str();
  sim->add_option("--lo", sim_lo, "start of the time range (default -n/2)");
  sim->add_option("--hi", sim_hi, "end of the time range (default n/2)");
  sim->add_option("--design", sim_design)->check(CLI::IsMember({"jittered", "regular"}))
      ->capture_default_str();
  sim->add_option("--seed", sim_seed)->capture_default_str();
  sim->add_option("--out", sim_out, "CSV (default stdout)");

  // predict
  auto* pred = app.add_subcommand("predict", "BLUP at query points");
  std::string pred_data, pred_fit, pred_query, pred_out;
  KernelFlags pred_kernel;
  FitConfig pred_cfg;
  pred->add_option("--data", pred_data, "training CSV")->required();
  pred->add_option("--query", pred_query, "CSV with t,series columns (y optional)")->required();
  pred->add_option("--fit", pred_fit, "fit JSON; fitted from --data when omitted");
  pred_kernel.add(pred);
  pred->add_option("--s-lo", pred_cfg.s_lo)->capture_default_str();
  pred->add_option("--s-hi", pred_cfg.s_hi)->capture_default_str();
  pred->add_option("--seed", pred_cfg.seed)->capture_default_str();
  pred->add_option("--out", pred_out, "prediction CSV (default stdout)");

  // bayes
  auto* bay = app.add_subcommand("bayes", "posterior sampling for a two-series data set");
  std::string bay_data, bay_draws = "draws.csv", bay_summary = "summary.json";
  KernelFlags bay_kernel;
  SamplerConfig bay_cfg;
  bay->add_option("--data", bay_data)->required();
  bay_kernel.add(bay);
  bay->add_option("--draws", bay_cfg.num_draws)->capture_default_str()->check(CLI::PositiveNumber);
  bay->add_option("--burnin", bay_cfg.burn_in)->capture_default_str()->check(CLI::NonNegativeNumber);
  bay->add_option("--seed", bay_cfg.seed)->capture_default_str();
  bay->add_option("--s-lo", bay_cfg.fit.s_lo)->capture_default_str();
  bay->add_option("--s-hi", bay_cfg.fit.s_hi)->capture_default_str();
  bay->add_option("--out-draws", bay_draws)->capture_default_str();
  bay->add_option("--out-summary", bay_summary)->capture_default_str();

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "baseline scores (TLCC, DTW, soft-DTW)");
  std::string bench_data, bench_out;
  double bench_gamma = 1.0, bench_lo = -1.0, bench_hi = 4.0;
  bench->add_option("--data", bench_data,
                    "CSV scored as pairs (first series, other series); arctan pairs when omitted");
  bench->add_option("--gamma", bench_gamma, "soft-DTW smoothing")->capture_default_str();
  bench->add_option("--lag-lo", bench_lo)->capture_default_str();
  bench->add_option("--lag-hi", bench_hi)->capture_default_str();
  bench->add_option("--out", bench_out, "CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) return cmd_fit(fit_data, fit_kernel, fit_cfg, fit_out);

    if (*exp) {
      for (const auto& f : exp_families) {
        KernelFlags kf{f, exp_nu, exp_c};
        exp_spec.kernels.push_back(kf.spec());
      }
      for (const auto& s : exp_sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got " + s);
        std::size_t used = 0;
        const std::string value = s.substr(eq + 1);
        double v = 0.0;
        try {
          v = std::stod(value, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != value.size()) throw ArgumentError("bad value in --set " + s);
        exp_spec.overrides[s.substr(0, eq)] = v;
      }
      const auto result = run_experiment(exp_spec);
      write_experiment(result, exp_out);
      std::cout << result.summary.dump(2) << '\n';
      if (result.degraded()) {
        std::cerr << result.failed << " of " << result.attempted << " replicates failed\n";
        return kDegraded;
      }
      return kOk;
    }

    if (*sim) {
      const auto spec = sim_kernel.spec();
      validate_params(sim_p);
      const double lo = std::isnan(sim_lo) ? -sim_n / 2.0 : sim_lo;
      const double hi = std::isnan(sim_hi) ? sim_n / 2.0 : sim_hi;
      const auto style = sim_design == "regular" ? DesignStyle::Regular : DesignStyle::JitteredGrid;
      const auto design = gen_time_design(sim_n, 2, style, {0.0, sim_p.s}, lo, hi,
                                          stream_seed(sim_seed, 0));
      const auto set = sample_gplag(spec, MultiParams::from_pairwise(sim_p), design,
                                    stream_seed(sim_seed, 1));
      emit(sim_out, [&](std::ostream& os) { write_csv(set, os); });
      return kOk;
    }

    if (*pred) {
      const auto train = center_series(load_csv(pred_data));
      FitResult model;
      int code = kOk;
      if (!pred_fit.empty()) {
        std::ifstream in(pred_fit);
        if (!in) throw std::runtime_error("cannot open " + pred_fit);
        model = fit_from_json(Json::parse(in));
        if (model.params.num_series() != train.num_series()) {
          throw ValidationError("fit and data disagree on the number of series");
        }
      } else {
        model = fit_mle(train, pred_kernel.spec(), pred_cfg);
        if (!model.converged) code = kDegraded;
      }
      const auto query = read_query(pred_query, train);
      const auto res = blup_predict(model, train, query.points);
      double sse = 0.0;
      int scored = 0;
      emit(pred_out, [&](std::ostream& os) {
        os.precision(17);
        os << "t,series,mean,variance\n";
        const auto& labels = train.labels();
        for (std::size_t i = 0; i < query.points.size(); ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          os << query.points[i].t << ',' << labels[query.points[i].series - 1] << ','
             << res.mean[ii] << ',' << res.variance[ii] << '\n';
          if (!std::isnan(query.y[i])) {
            sse += (res.mean[ii] - query.y[i]) * (res.mean[ii] - query.y[i]);
            ++scored;
          }
        }
      });
      if (scored > 0) std::cerr << "mse " << sse / scored << " over " << scored << " points\n";
      return code;
    }

    if (*bay) {
      const auto set = center_series(load_csv(bay_data));
      if (set.num_series() != 2) throw ValidationError("bayes needs exactly two series");
      const auto spec = bay_kernel.spec();
      bay_cfg.fit.seed = bay_cfg.seed;
      const auto priors = PriorSpec::defaults_for(set, spec, bay_cfg.fit);
      const auto samples = sample_posterior(&set, spec, priors, bay_cfg);
      emit(bay_draws, [&](std::ostream& os) {
        os.precision(17);
        os << "a,b,s,sigma2,tau2\n";
        for (Eigen::Index r = 0; r < samples.draws.rows(); ++r) {
          for (Eigen::Index c = 0; c < 5; ++c) os << (c ? "," : "") << samples.draws(r, c);
          os << '\n';
        }
      });
      Json summary = summary_to_json(summarize(samples), samples.acceptance_rate);
      summary["family"] = to_string(spec);
      summary["seed"] = bay_cfg.seed;
      summary["num_draws"] = bay_cfg.num_draws;
      summary["burn_in"] = bay_cfg.burn_in;
      emit(bay_summary, [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
      return kOk;
    }

    if (*bench) {
      std::vector<TimeSeriesSet> pairs;
      std::vector<std::string> ids;
      if (bench_data.empty()) {
        pairs = arctan_pairs(nullptr, &ids);
      } else {
        const auto set = load_csv(bench_data);
        const auto first = set.series_observations(1);
        for (int l = 2; l <= set.num_series(); ++l) {
          std::vector<Observation> obs = first;
          for (auto o : set.series_observations(l)) {
            o.series = 2;
            obs.push_back(o);
          }
          pairs.emplace_back(std::move(obs), 2);
          ids.push_back(set.labels()[l - 1]);
        }
      }
      const auto rows = run_benchmark(pairs, ids, bench_gamma, bench_lo, bench_hi);
      emit(bench_out, [&](std::ostream& os) {
        os.precision(17);
        os << "pair_id,method,score,lag\n";
        for (const auto& r : rows) {
          os << '"' << r.pair_id << "\"," << r.method << ',' << r.score << ',';
          if (!std::isnan(r.lag)) os << r.lag;
          os << '\n';
        }
      });
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
