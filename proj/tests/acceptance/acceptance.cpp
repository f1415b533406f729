// End-to-end checks at the published tolerances. Prints one PASS/FAIL line
// per criterion and exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gplag/baselines.hpp"
#include "gplag/experiments.hpp"
#include "gplag/inference.hpp"
#include "gplag/kernels.hpp"
#include "gplag/linalg.hpp"
#include "gplag/rng.hpp"
#include "oracles.hpp"

using namespace gplag;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

const KernelSpec kLRBF{Family::LRBF, 1.5, 1.0};
const KernelSpec kLExp{Family::LExp, 0.5, 1.0};
const KernelSpec kLMat{Family::LMat, 1.5, 1.0};

// Shared between the recovery and microergodicity checks.
ExperimentResult recovery_result;

Outcome recovery() {
  ExperimentSpec spec;
  spec.name = "recovery";
  spec.replicates = 100;
  spec.seed = 2024;
  spec.kernels = {kLRBF, kLExp, kLMat};
  recovery_result = run_experiment(spec);
  bool ok = true;
  std::string detail;
  for (const auto& k : spec.kernels) {
    const auto& fam = recovery_result.summary["families"][to_string(k)];
    const double s = fam["s"]["median"], a = fam["a"]["median"];
    ok = ok && within(s, 1.7, 2.3) && within(a, 0.6, 1.5);
    detail += to_string(k) + " median s=" + num(s) + " a=" + num(a) + "; ";
  }
  detail += "failed=" + std::to_string(recovery_result.failed);
  return {ok, detail};
}

Outcome consistency() {
  ExperimentSpec spec;
  spec.name = "consistency";
  spec.replicates = 100;
  spec.seed = 2025;
  const auto result = run_experiment(spec);
  std::vector<double> iqr;
  std::string detail = "IQR(s):";
  for (const auto& size : result.summary["sizes"]) {
    iqr.push_back(size["s"]["iqr"].get<double>());
    detail += " n=" + std::to_string(size["n"].get<int>()) + ":" + num(iqr.back());
  }
  int inversions = 0;
  bool ok = iqr.size() == 4;
  for (std::size_t i = 1; i < iqr.size(); ++i) {
    if (iqr[i] <= iqr[i - 1]) continue;
    ++inversions;
    if (iqr[i] > 1.05 * iqr[i - 1]) ok = false;
  }
  ok = ok && inversions <= 1;
  return {ok, detail};
}

Outcome prediction() {
  ExperimentSpec spec;
  spec.name = "prediction";
  spec.replicates = 100;
  spec.seed = 2026;
  spec.overrides = {{"linear", 0.0}};
  const auto result = run_experiment(spec);
  const double rate = result.summary["settings"]["kernel"]["win_rate"];
  return {rate >= 0.7, "win rate " + num(rate) + " failed=" + std::to_string(result.failed)};
}

Outcome clustering() {
  ExperimentSpec spec;
  spec.name = "arctan-cluster";
  spec.seed = 1;
  const auto start = std::chrono::steady_clock::now();
  const auto result = run_experiment(spec);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& m = result.summary["methods"];
  const double g_ari = m["gplag"]["ari"], g_nmi = m["gplag"]["nmi"];
  bool gap = false;
  std::string detail = "gplag ARI=" + num(g_ari) + " NMI=" + num(g_nmi);
  for (const char* base : {"tlcc", "dtw", "soft-dtw"}) {
    const double r = m[base]["ari"];
    gap = gap || r < 1.0;
    detail += std::string(" ") + base + "=" + num(r);
  }
  detail += " time=" + num(secs) + "s";
  return {g_ari == 1.0 && g_nmi == 1.0 && gap && secs <= 120.0, detail};
}

Outcome three_series() {
  ExperimentSpec spec;
  spec.name = "three-series";
  spec.replicates = 100;
  spec.seed = 2027;
  const auto result = run_experiment(spec);
  const auto& s = result.summary;
  const double a12 = s["a12"]["median"], a13 = s["a13"]["median"], a23 = s["a23"]["median"];
  const double s2 = s["s2"]["median"], s3 = s["s3"]["median"];
  const double viol = s["max_triangle_violation"];
  const bool ok = within(a12, 0.5, 1.6) && within(a13, 0.5, 1.6) && within(a23, 0.5, 1.6) &&
                  within(s2, 1.6, 2.4) && within(s3, 3.5, 4.5) && viol <= 1e-8;
  return {ok, "median a12=" + num(a12) + " a13=" + num(a13) + " a23=" + num(a23) + " s2=" +
                  num(s2) + " s3=" + num(s3) + " max triangle violation=" + num(viol) +
                  " failed=" + std::to_string(result.failed)};
}

std::vector<KernelSpec> eight_families() {
  return {kLRBF,
          kLExp,
          kLMat,
          {Family::GneitingMatern, 1.5, 0.5},
          {Family::GneitingExpSep, 0.5, 0.7},
          {Family::LaplaceScaled, 1.5, 1.0},
          {Family::RationalQuadratic, 1.5, 1.0},
          {Family::ComplexExponential, 1.5, 1.0}};
}

// Dissimilarities are distances between random planar points, so the
// triangle inequalities hold.
MultiParams random_params(Rng& rng, int L, double tau2) {
  MultiParams p;
  p.sigma2 = rng.uniform(0.5, 5.0);
  p.b = rng.uniform(0.1, 2.0);
  p.tau2 = tau2;
  std::vector<Eigen::Vector2d> pos;
  for (int l = 0; l < L; ++l) pos.emplace_back(rng.uniform(0, 2), rng.uniform(0, 2));
  p.A = Eigen::MatrixXd::Zero(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) p.A(i, j) = (pos[i] - pos[j]).norm();
  p.S = Eigen::VectorXd::Zero(L);
  for (int l = 1; l < L; ++l) p.S[l] = rng.uniform(-3, 3);
  return p;
}

std::vector<Point> random_points(Rng& rng, int n, int L) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(0, 20), 1 + static_cast<int>(rng.below(L))});
  return pts;
}

Outcome likelihood_oracle() {
  Rng rng(606);
  const auto families = eight_families();
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(5));
    const int L = 2 + static_cast<int>(rng.below(2));
    const auto p = random_params(rng, L, rng.uniform(0.05, 1.0));
    const auto pts = random_points(rng, n, L);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    const auto& spec = families[trial % families.size()];
    const double ll = log_marginal_likelihood(spec, p, pts, y);
    const double ref = oracle::mvn_logpdf(y, covariance_matrix(spec, p, pts, true));
    worst = std::max(worst, std::abs(ll - ref) / std::max(std::abs(ref), 1e-300));
  }
  return {worst <= 1e-10, "max relative error " + num(worst)};
}

Outcome kernel_validity() {
  Rng rng(707);
  double worst_jitter = 0.0, worst_eig = 0.0;
  std::string failures;
  for (const auto& spec : eight_families()) {
    int bad = 0;
    for (int design = 0; design < 200; ++design) {
      const int L = 2 + static_cast<int>(rng.below(2));
      const auto p = random_params(rng, L, 0.0);
      const auto K = covariance_matrix(spec, p, random_points(rng, 40, L), false);
      double jitter = INFINITY;
      try {
        jitter = factorize_with_jitter(K, p.sigma2).jitter;
      } catch (const std::exception&) {
      }
      const double eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues()[0];
      worst_jitter = std::max(worst_jitter, jitter / p.sigma2);
      worst_eig = std::min(worst_eig, eig / p.sigma2);
      if (jitter > 1e-8 * p.sigma2 || eig < -1e-8 * p.sigma2) ++bad;
    }
    if (bad > 0) failures += " " + to_string(spec) + ":" + std::to_string(bad) + "/200";
  }
  return {failures.empty(), "max jitter/sigma2=" + num(worst_jitter) +
                                " min eigenvalue/sigma2=" + num(worst_eig) +
                                (failures.empty() ? "" : " failing:" + failures)};
}

Outcome spectral() {
  double worst = 0.0;
  const auto m = MultiParams::from_pairwise({2.0, 3.0, 0.7, 1.5, 0.0});
  for (const auto& spec : {kLRBF, kLExp, kLMat}) {
    for (int l = 1; l <= 2; ++l) {
      for (int lp = 1; lp <= 2; ++lp) {
        const double shift = m.S[l - 1] - m.S[lp - 1];
        auto f = [&](double t) { return kernel_eval(spec, m, {t, l}, {0.0, lp}); };
        for (double w = -10.0; w <= 10.0; w += 0.5) {
          const auto numeric = oracle::fourier_transform(f, w, 40.0, {-shift}, 4000);
          const auto exact = spectral_density(spec, m, w, l, lp);
          worst = std::max(worst, std::abs(numeric - exact) / std::abs(exact));
        }
      }
    }
  }
  return {worst <= 1e-4, "max relative error " + num(worst)};
}

double cv(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= x.size();
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (x.size() - 1)) / std::abs(mean);
}

Outcome microergodic() {
  const auto& h = recovery_result.header;
  auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
  };
  std::vector<double> sigma2, product;
  for (const auto& row : recovery_result.rows) {
    if (row[col("family")] != to_string(kLExp) || row[col("status")] != "ok") continue;
    if (sigma2.size() == 50) break;
    const double s2 = std::stod(row[col("sigma2")]), b = std::stod(row[col("b")]);
    sigma2.push_back(s2);
    product.push_back(s2 * b);
  }
  if (sigma2.size() < 50) return {false, "only " + std::to_string(sigma2.size()) + " replicates"};
  const double c1 = cv(sigma2), c2 = cv(product);
  return {c2 < c1, "CV(sigma2*b)=" + num(c2) + " CV(sigma2)=" + num(c1)};
}

Outcome baseline_oracles() {
  Rng rng(1010);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    std::vector<double> x(1 + rng.below(6)), y(1 + rng.below(6));
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    worst = std::max(worst, std::abs(dtw(x, y).distance - oracle::dtw_enumerate(x, y)));
  }
  double worst_ari = 0.0, worst_nmi = 0.0;
  for (int n = 1; n <= 6; ++n) {
    const auto parts = oracle::all_partitions(n);
    for (const auto& a : parts) {
      for (const auto& b : parts) {
        worst_ari = std::max(worst_ari, std::abs(ari(a, b) - oracle::ari_pairs(a, b)));
        worst_nmi = std::max(worst_nmi, std::abs(nmi(a, b) - oracle::nmi_entropy(a, b)));
      }
    }
  }
  return {worst <= 1e-12 && worst_ari <= 1e-12 && worst_nmi <= 1e-12,
          "dtw " + num(worst) + " ari " + num(worst_ari) + " nmi " + num(worst_nmi)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 parameter recovery", recovery},
      {"2 consistency", consistency},
      {"3 prediction", prediction},
      {"4 clustering", clustering},
      {"5 three-series", three_series},
      {"6 likelihood oracle", likelihood_oracle},
      {"7 kernel validity", kernel_validity},
      {"8 spectral identities", spectral},
      {"9 microergodicity", microergodic},
      {"10 baseline oracles", baseline_oracles},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
