#include "gplag/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "gplag/error.hpp"
#include "gplag/rng.hpp"

namespace gplag {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

LagScan tlcc(const std::vector<Observation>& first, const std::vector<Observation>& second,
             const std::vector<double>& lag_grid) {
  if (lag_grid.empty()) throw ArgumentError("empty lag grid");
  std::vector<Observation> base = first;
  std::sort(base.begin(), base.end(),
            [](const Observation& a, const Observation& b) { return a.t < b.t; });
  const double tol = 0.5 * median_spacing(base);

  LagScan scan;
  scan.lags = lag_grid;
  scan.best_corr = -kInf;
  scan.best_lag = lag_grid.front();
  // Lags that round to the same pairing tie; prefer the one closest to it.
  double best_mismatch = kInf;
  std::vector<double> xs, ys;
  for (double lag : lag_grid) {
    xs.clear();
    ys.clear();
    double mismatch = 0.0;
    for (const auto& o : second) {
      const double target = o.t + lag;
      auto it = std::lower_bound(base.begin(), base.end(), target,
                                 [](const Observation& a, double t) { return a.t < t; });
      const Observation* best = nullptr;
      if (it != base.end()) best = &*it;
      if (it != base.begin()) {
        const Observation* prev = &*(it - 1);
        if (!best || std::abs(prev->t - target) <= std::abs(best->t - target)) best = prev;
      }
      if (best && std::abs(best->t - target) <= tol) {
        xs.push_back(best->y);
        ys.push_back(o.y);
        mismatch += std::abs(best->t - target);
      }
    }
    const double r = xs.size() >= 3 ? pearson(xs, ys) : -kInf;
    if (!xs.empty()) mismatch /= static_cast<double>(xs.size());
    scan.correlations.push_back(r);
    if (r > scan.best_corr || (r == scan.best_corr && mismatch < best_mismatch)) {
      scan.best_corr = r;
      scan.best_lag = lag;
      best_mismatch = mismatch;
    }
  }
  return scan;
}

LagScan tlcc(const TimeSeriesSet& set, const std::vector<double>& lag_grid) {
  return tlcc(set.series_observations(1), set.series_observations(2), lag_grid);
}

WarpResult dtw(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size(), m = y.size();
  if (n == 0 || m == 0) throw ArgumentError("dtw needs nonempty sequences");
  std::vector<double> D((n + 1) * (m + 1), kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return D[i * (m + 1) + j]; };
  at(0, 0) = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const double c = (x[i - 1] - y[j - 1]) * (x[i - 1] - y[j - 1]);
      at(i, j) = c + std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
    }
  }
  WarpResult r;
  r.distance = at(n, m);
  std::size_t i = n, j = m;
  r.path.emplace_back(static_cast<int>(i), static_cast<int>(j));
  while (i > 1 || j > 1) {
    const double diag = at(i - 1, j - 1), up = at(i - 1, j), left = at(i, j - 1);
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
    r.path.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }
  std::reverse(r.path.begin(), r.path.end());
  return r;
}

double soft_dtw(const std::vector<double>& x, const std::vector<double>& y, double gamma) {
  if (!(gamma > 0.0)) throw ArgumentError("soft-DTW needs gamma > 0");
  const std::size_t n = x.size(), m = y.size();
  if (n == 0 || m == 0) throw ArgumentError("soft-DTW needs nonempty sequences");
  std::vector<double> R((n + 1) * (m + 1), kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return R[i * (m + 1) + j]; };
  at(0, 0) = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const double c = (x[i - 1] - y[j - 1]) * (x[i - 1] - y[j - 1]);
      const double r[3] = {at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)};
      const double lo = std::min({r[0], r[1], r[2]});
      double sum = 0.0;
      for (double v : r) {
        if (v < kInf) sum += std::exp(-(v - lo) / gamma);
      }
      at(i, j) = c + lo - gamma * std::log(sum);
    }
  }
  return at(n, m);
}

double soft_dtw_divergence(const std::vector<double>& x, const std::vector<double>& y,
                           double gamma) {
  return soft_dtw(x, y, gamma) - 0.5 * soft_dtw(x, x, gamma) - 0.5 * soft_dtw(y, y, gamma);
}

KMeansResult kmeans(const std::vector<double>& values, int k, std::uint64_t seed,
                    int restarts) {
  const std::set<double> distinct(values.begin(), values.end());
  if (k < 1 || static_cast<std::size_t>(k) > distinct.size()) {
    throw ArgumentError("k must lie in 1..(number of distinct values)");
  }
  const std::size_t n = values.size();
  Rng rng(seed);
  KMeansResult best;
  best.sse = kInf;
  for (int rep = 0; rep < std::max(1, restarts); ++rep) {
    // k-means++ seeding
    std::vector<double> centers{values[rng.below(n)]};
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double m = kInf;
        for (double c : centers) m = std::min(m, (values[i] - c) * (values[i] - c));
        d2[i] = m;
        total += m;
      }
      double u = rng.uniform() * total;
      std::size_t pick = 0;
      for (; pick + 1 < n; ++pick) {
        if (d2[pick] > 0.0 && (u -= d2[pick]) <= 0.0) break;
      }
      while (d2[pick] == 0.0) pick = (pick + 1) % n;  // k <= distinct, so one exists
      centers.push_back(values[pick]);
    }
    std::vector<int> labels(n, -1);
    for (int iter = 0; iter < 300; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        int arg = 0;
        for (int c = 1; c < k; ++c) {
          if (std::abs(values[i] - centers[c]) < std::abs(values[i] - centers[arg])) arg = c;
        }
        if (labels[i] != arg) {
          labels[i] = arg;
          changed = true;
        }
      }
      std::vector<double> sum(k, 0.0);
      std::vector<int> count(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        sum[labels[i]] += values[i];
        ++count[labels[i]];
      }
      for (int c = 0; c < k; ++c) {
        if (count[c] > 0) {
          centers[c] = sum[c] / count[c];
        } else {
          // Empty cluster takes the point farthest from its center.
          std::size_t far = 0;
          double worst = -1.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double e = std::abs(values[i] - centers[labels[i]]);
            if (e > worst) {
              worst = e;
              far = i;
            }
          }
          centers[c] = values[far];
          changed = true;
        }
      }
      if (!changed) break;
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sse += (values[i] - centers[labels[i]]) * (values[i] - centers[labels[i]]);
    }
    if (sse < best.sse) best = KMeansResult{labels, centers, sse};
  }
  return best;
}

namespace {

struct Contingency {
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  double n = 0.0;
};

Contingency contingency(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ArgumentError("label vectors differ in length");
  Contingency c;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.cells[{a[i], b[i]}] += 1.0;
    c.rows[a[i]] += 1.0;
    c.cols[b[i]] += 1.0;
  }
  c.n = static_cast<double>(a.size());
  return c;
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

}  // namespace

double ari(const std::vector<int>& labels, const std::vector<int>& truth) {
  const auto c = contingency(labels, truth);
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [key, v] : c.cells) index += choose2(v);
  for (const auto& [key, v] : c.rows) sa += choose2(v);
  for (const auto& [key, v] : c.cols) sb += choose2(v);
  const double total = choose2(c.n);
  const double expected = total > 0.0 ? sa * sb / total : 0.0;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) {
    // Both partitions trivial (all-one-cluster or all-singletons).
    return c.rows.size() == c.cols.size() && c.cells.size() == c.rows.size() ? 1.0 : 0.0;
  }
  return (index - expected) / (max_index - expected);
}

double nmi(const std::vector<int>& labels, const std::vector<int>& truth) {
  const auto c = contingency(labels, truth);
  auto entropy = [&](const std::map<int, double>& m) {
    double h = 0.0;
    for (const auto& [key, v] : m) h -= v / c.n * std::log(v / c.n);
    return h;
  };
  const double hu = entropy(c.rows), hv = entropy(c.cols);
  if (hu + hv == 0.0) return 1.0;
  double mi = 0.0;
  for (const auto& [key, v] : c.cells) {
    mi += v / c.n * std::log(c.n * v / (c.rows.at(key.first) * c.cols.at(key.second)));
  }
  return std::clamp(2.0 * mi / (hu + hv), 0.0, 1.0);
}

}  // namespace gplag
