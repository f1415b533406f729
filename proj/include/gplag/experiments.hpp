#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gplag/baselines.hpp"
#include "gplag/data.hpp"
#include "gplag/kernels.hpp"
#include "gplag/serialize.hpp"

namespace gplag {

struct ExperimentSpec {
  std::string name;  // recovery, consistency, prediction, arctan-cluster, three-series
  int replicates = 100;
  std::uint64_t seed = 1;
  std::vector<KernelSpec> kernels;  // empty: the preset's default families
  std::map<std::string, double> overrides;
  int threads = 0;  // 0: GPLAG_THREADS or the hardware concurrency
};

struct ExperimentResult {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  Json summary;
  int attempted = 0;
  int failed = 0;

  bool degraded() const { return failed * 10 > attempted; }
};

const std::vector<std::string>& experiment_names();

/// Worker count: `requested` if positive, else GPLAG_THREADS, else the
/// hardware concurrency, never more than `tasks`.
int worker_count(int requested, int tasks);

/// Runs a named preset. Replicate i uses stream_seed(seed, i); replicates
/// that throw are recorded with a "failed: ..." status and left out of the
/// summary.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Writes replicates.csv and summary.json into `dir` (created if missing).
void write_experiment(const ExperimentResult& result, const std::string& dir);

/// One series pair scored by a baseline method.
struct BenchmarkRow {
  std::string pair_id;
  std::string method;
  double score;
  double lag;  // NaN for methods without a lag
};

/// The nine arctan pairs (target k=0.01, s=0 against every (k, s)), series 1
/// the target, labelled "k=<k>,s=<s>"; truth holds the cluster of each pair.
std::vector<TimeSeriesSet> arctan_pairs(std::vector<int>* truth = nullptr,
                                        std::vector<std::string>* ids = nullptr);

/// TLCC, DTW, soft-DTW and soft-DTW divergence on every pair.
std::vector<BenchmarkRow> run_benchmark(const std::vector<TimeSeriesSet>& pairs,
                                        const std::vector<std::string>& ids, double gamma,
                                        double lag_lo, double lag_hi);

}  // namespace gplag
