#include "gplag/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "gplag/error.hpp"
#include "gplag/rng.hpp"

namespace gplag {

TimeSeriesSet::TimeSeriesSet(std::vector<Observation> observations, int num_series,
                             std::vector<std::string> labels, std::vector<double> offsets)
    : obs_(std::move(observations)),
      num_series_(num_series),
      labels_(std::move(labels)),
      offsets_(std::move(offsets)) {
  if (num_series_ < 2) throw ValidationError("a time series set needs at least 2 series");
  if (labels_.empty()) {
    for (int l = 1; l <= num_series_; ++l) labels_.push_back(std::to_string(l));
  }
  if (offsets_.empty()) offsets_.assign(num_series_, 0.0);
  if (static_cast<int>(labels_.size()) != num_series_ ||
      static_cast<int>(offsets_.size()) != num_series_) {
    throw ValidationError("labels/offsets must have one entry per series");
  }
  std::vector<std::size_t> counts(num_series_, 0);
  for (const auto& o : obs_) {
    if (!std::isfinite(o.t) || !std::isfinite(o.y)) {
      throw ValidationError("observation with non-finite time or value");
    }
    if (o.series < 1 || o.series > num_series_) {
      throw ValidationError("series id " + std::to_string(o.series) + " outside 1.." +
                            std::to_string(num_series_));
    }
    ++counts[o.series - 1];
  }
  for (int l = 0; l < num_series_; ++l) {
    if (counts[l] < 2) {
      throw ValidationError("series '" + labels_[l] + "' has " + std::to_string(counts[l]) +
                            " observation(s); at least 2 are required");
    }
  }
  std::stable_sort(obs_.begin(), obs_.end(), [](const Observation& a, const Observation& b) {
    return a.series != b.series ? a.series < b.series : a.t < b.t;
  });
}

std::size_t TimeSeriesSet::count(int series) const {
  return static_cast<std::size_t>(std::count_if(
      obs_.begin(), obs_.end(), [series](const Observation& o) { return o.series == series; }));
}

std::vector<std::size_t> TimeSeriesSet::indices(int series) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    if (obs_[i].series == series) idx.push_back(i);
  }
  return idx;
}

Eigen::VectorXd TimeSeriesSet::values() const {
  Eigen::VectorXd v(obs_.size());
  for (std::size_t i = 0; i < obs_.size(); ++i) v[i] = obs_[i].y;
  return v;
}

Eigen::VectorXd TimeSeriesSet::times() const {
  Eigen::VectorXd v(obs_.size());
  for (std::size_t i = 0; i < obs_.size(); ++i) v[i] = obs_[i].t;
  return v;
}

std::vector<int> TimeSeriesSet::series_ids() const {
  std::vector<int> ids(obs_.size());
  for (std::size_t i = 0; i < obs_.size(); ++i) ids[i] = obs_[i].series;
  return ids;
}

std::vector<Observation> TimeSeriesSet::series_observations(int series) const {
  std::vector<Observation> out;
  for (const auto& o : obs_) {
    if (o.series == series) out.push_back({o.t, 1, o.y});
  }
  return out;
}

int TimeSeriesSet::id_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin()) + 1;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

TimeSeriesSet parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw FormatError("empty file: expected header 't,series,y'");
  const auto header = split_fields(line);
  if (header.size() != 3 || header[0] != "t" || header[1] != "series" || header[2] != "y") {
    if (std::count(header.begin(), header.end(), "t") > 1 ||
        std::count(header.begin(), header.end(), "series") > 1 ||
        std::count(header.begin(), header.end(), "y") > 1) {
      throw FormatError("duplicate column in header '" + trim(line) + "'");
    }
    throw FormatError("expected header 't,series,y', got '" + trim(line) + "'");
  }

  std::vector<Observation> obs;
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 3) {
      throw ParseError("expected 3 fields, got " + std::to_string(f.size()), line_no);
    }
    Observation o;
    if (!parse_double(f[0], o.t)) throw ParseError("non-numeric time '" + f[0] + "'", line_no);
    if (!parse_double(f[2], o.y)) throw ParseError("non-numeric value '" + f[2] + "'", line_no);
    if (f[1].empty()) throw ParseError("empty series label", line_no);
    auto [it, inserted] = ids.try_emplace(f[1], static_cast<int>(labels.size()) + 1);
    if (inserted) labels.push_back(f[1]);
    o.series = it->second;
    obs.push_back(o);
  }
  if (labels.size() < 2) {
    throw ValidationError("need at least 2 series, found " + std::to_string(labels.size()));
  }
  const int count = static_cast<int>(labels.size());
  return TimeSeriesSet(std::move(obs), count, std::move(labels));
}

TimeSeriesSet load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return parse_csv(in);
}

void write_csv(const TimeSeriesSet& set, std::ostream& out) {
  out << "t,series,y\n" << std::setprecision(17);
  for (const auto& o : set.observations()) {
    out << o.t << ',' << set.labels()[o.series - 1] << ',' << o.y << '\n';
  }
}

void save_csv(const TimeSeriesSet& set, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  write_csv(set, out);
}

TimeSeriesSet center_series(const TimeSeriesSet& set) {
  const int L = set.num_series();
  std::vector<double> sums(L, 0.0);
  std::vector<std::size_t> counts(L, 0);
  for (const auto& o : set.observations()) {
    sums[o.series - 1] += o.y;
    ++counts[o.series - 1];
  }
  std::vector<double> means(L);
  for (int l = 0; l < L; ++l) means[l] = sums[l] / static_cast<double>(counts[l]);

  std::vector<Observation> obs = set.observations();
  for (auto& o : obs) o.y -= means[o.series - 1];
  // Second pass removes the rounding residue of the first.
  std::fill(sums.begin(), sums.end(), 0.0);
  for (const auto& o : obs) sums[o.series - 1] += o.y;
  std::vector<double> offsets = set.offsets();
  for (int l = 0; l < L; ++l) {
    const double residue = sums[l] / static_cast<double>(counts[l]);
    means[l] += residue;
    offsets[l] += means[l];
  }
  for (auto& o : obs) o.y = o.y - sums[o.series - 1] / static_cast<double>(counts[o.series - 1]);
  return TimeSeriesSet(std::move(obs), L, set.labels(), std::move(offsets));
}

SplitResult train_test_split(const TimeSeriesSet& set, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ArgumentError("split fraction must lie in (0,1)");
  }
  const int L = set.num_series();
  std::size_t max_n = 0;
  for (int l = 1; l <= L; ++l) {
    const std::size_t n = set.count(l);
    max_n = std::max(max_n, n);
    if (fraction * static_cast<double>(n) < 2.0) {
      throw ArgumentError("series '" + set.labels()[l - 1] +
                          "' too short for the requested training fraction");
    }
  }
  // Fisher-Yates over positions, shared by all series.
  std::vector<std::size_t> order(max_n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = max_n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  std::vector<Observation> train, test;
  for (int l = 1; l <= L; ++l) {
    const auto idx = set.indices(l);
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * idx.size()));
    std::vector<bool> in_train(idx.size(), false);
    std::size_t taken = 0;
    for (std::size_t pos : order) {
      if (taken == n_train) break;
      if (pos < idx.size()) {
        in_train[pos] = true;
        ++taken;
      }
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      (in_train[k] ? train : test).push_back(set[idx[k]]);
    }
  }
  return SplitResult{TimeSeriesSet(std::move(train), L, set.labels(), set.offsets()),
                     TimeSeriesSet(std::move(test), L, set.labels(), set.offsets()), seed};
}

double sample_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

double median_spacing(const std::vector<Observation>& obs) {
  std::vector<double> gaps;
  for (std::size_t i = 1; i < obs.size(); ++i) {
    const double g = obs[i].t - obs[i - 1].t;
    if (g > 0.0) gaps.push_back(g);
  }
  if (gaps.empty()) return 1.0;
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  return gaps[gaps.size() / 2];
}

}  // namespace gplag
