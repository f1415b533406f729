#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gplag {

struct Observation {
  double t = 0.0;
  int series = 1;  // 1-based
  double y = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Irregularly sampled observations of L >= 2 series, stored sorted by
/// (series, t). Series 1 is the lag baseline. Immutable after construction.
class TimeSeriesSet {
 public:
  /// Validates and canonically sorts. Labels default to "1".."L".
  /// Throws ValidationError on a broken invariant.
  TimeSeriesSet(std::vector<Observation> observations, int num_series,
                std::vector<std::string> labels = {}, std::vector<double> offsets = {});

  int num_series() const { return num_series_; }
  std::size_t size() const { return obs_.size(); }
  const std::vector<Observation>& observations() const { return obs_; }
  const Observation& operator[](std::size_t i) const { return obs_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& offsets() const { return offsets_; }
  double offset(int series) const { return offsets_.at(series - 1); }

  std::size_t count(int series) const;
  // Row indices belonging to `series`, in time order.
  std::vector<std::size_t> indices(int series) const;

  Eigen::VectorXd values() const;
  Eigen::VectorXd times() const;
  std::vector<int> series_ids() const;

  // Single-series set holding only `series` (relabelled to 1, offset kept).
  // Used for the single-series GP fits; not a valid L >= 2 set.
  std::vector<Observation> series_observations(int series) const;

  // Returns -1 if `label` is unknown.
  int id_of(const std::string& label) const;

  friend bool operator==(const TimeSeriesSet&, const TimeSeriesSet&) = default;

 private:
  std::vector<Observation> obs_;
  int num_series_;
  std::vector<std::string> labels_;
  std::vector<double> offsets_;
};

struct SplitResult {
  TimeSeriesSet train;
  TimeSeriesSet test;
  std::uint64_t seed;
};

/// Reads a `t,series,y` CSV. Labels are mapped to ids in order of first
/// appearance.
TimeSeriesSet load_csv(const std::filesystem::path& path);
TimeSeriesSet parse_csv(std::istream& in);

/// Writes values with 17 significant digits so a reload is bit-exact.
void save_csv(const TimeSeriesSet& set, const std::filesystem::path& path);
void write_csv(const TimeSeriesSet& set, std::ostream& out);

/// Subtracts each series' sample mean; the shift is added to `offsets`.
TimeSeriesSet center_series(const TimeSeriesSet& set);

/// Paired random split: positions drawn once and held out on every series.
SplitResult train_test_split(const TimeSeriesSet& set, double fraction, std::uint64_t seed);

double sample_variance(const Eigen::VectorXd& v);
double median_spacing(const std::vector<Observation>& sorted_single_series);

}  // namespace gplag
