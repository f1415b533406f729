#include "gplag/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gplag/error.hpp"

namespace gplag {

namespace {

struct MaternTerms {
  double m;   // M(r)
  double dm;  // dM/dr
};

// Unit-variance Matern correlation 2^(1-nu)/Gamma(nu) r^nu K_nu(r) for
// half-integer nu, in closed form.
MaternTerms matern(double nu, double r) {
  const double e = std::exp(-r);
  if (nu == 0.5) return {e, -e};
  if (nu == 1.5) return {(1.0 + r) * e, -r * e};
  return {(1.0 + r + r * r / 3.0) * e, -(r / 3.0) * (1.0 + r) * e};
}

double sgn(double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); }

bool supported_nu(double nu) { return nu == 0.5 || nu == 1.5 || nu == 2.5; }

void check_structure(const MultiParams& p) {
  const int L = p.num_series();
  if (!(std::isfinite(p.sigma2) && p.sigma2 > 0.0)) throw ValidationError("sigma2 must be > 0");
  if (!(std::isfinite(p.b) && p.b > 0.0)) throw ValidationError("b must be > 0");
  if (!(std::isfinite(p.tau2) && p.tau2 >= 0.0)) throw ValidationError("tau2 must be >= 0");
  if (p.A.rows() != L || p.A.cols() != L) throw ValidationError("A must be L x L with L = |S|");
  for (int i = 0; i < L; ++i) {
    if (!std::isfinite(p.S[i])) throw ValidationError("S entries must be finite");
    for (int j = 0; j < L; ++j) {
      if (!(std::isfinite(p.A(i, j)) && p.A(i, j) >= 0.0)) {
        throw ValidationError("A entries must be finite and >= 0");
      }
      if (p.A(i, j) != p.A(j, i)) throw ValidationError("A must be symmetric");
    }
    if (p.A(i, i) != 0.0) throw ValidationError("A must have a zero diagonal");
  }
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::LRBF: return "lrbf";
    case Family::LExp: return "lexp";
    case Family::LMat: return "lmat";
    case Family::GneitingMatern: return "gneiting-matern";
    case Family::GneitingExpSep: return "gneiting-exp";
    case Family::LaplaceScaled: return "laplace";
    case Family::RationalQuadratic: return "rational-quadratic";
    case Family::ComplexExponential: return "complex-exponential";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  for (Family f : all_families()) {
    if (family_name(f) == name) return f;
  }
  throw ArgumentError("unknown kernel family '" + name + "'");
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> families = {
      Family::LRBF,           Family::LExp,          Family::LMat,
      Family::GneitingMatern, Family::GneitingExpSep, Family::LaplaceScaled,
      Family::RationalQuadratic, Family::ComplexExponential};
  return families;
}

std::string to_string(const KernelSpec& spec) {
  std::string s = family_name(spec.family);
  if (spec.family == Family::LMat || spec.family == Family::GneitingMatern) {
    std::ostringstream os;
    os << "(nu=" << spec.nu << ")";
    s += os.str();
  }
  return s;
}

MultiParams MultiParams::from_pairwise(const PairwiseParams& p) {
  MultiParams m;
  m.sigma2 = p.sigma2;
  m.b = p.b;
  m.tau2 = p.tau2;
  m.A = Eigen::MatrixXd::Zero(2, 2);
  m.A(0, 1) = m.A(1, 0) = p.a;
  m.S = Eigen::VectorXd::Zero(2);
  m.S[1] = p.s;
  return m;
}

PairwiseParams MultiParams::to_pairwise() const {
  if (num_series() != 2) throw ArgumentError("to_pairwise needs exactly 2 series");
  return PairwiseParams{sigma2, b, A(0, 1), S[1] - S[0], tau2};
}

void check_spec(const KernelSpec& spec) {
  if ((spec.family == Family::LMat || spec.family == Family::GneitingMatern) &&
      !supported_nu(spec.nu)) {
    throw ArgumentError("unsupported smoothness nu=" + std::to_string(spec.nu) +
                        "; expected 0.5, 1.5 or 2.5");
  }
  if ((spec.family == Family::GneitingMatern || spec.family == Family::GneitingExpSep) &&
      !(std::isfinite(spec.c) && spec.c > 0.0)) {
    throw ArgumentError("separability c must be > 0");
  }
}

KernelPartials kernel_partials(const KernelSpec& spec, double sigma2, double b, double a2,
                               double d) {
  const double q = 1.0 + a2;
  const double u = std::abs(d);
  const double sg = sgn(d);
  KernelPartials k{};
  switch (spec.family) {
    case Family::LRBF: {
      const double v = sigma2 / std::sqrt(q) * std::exp(-b * d * d / q);
      k.value = v;
      k.d_b = -v * d * d / q;
      k.d_lag = -v * 2.0 * b * d / q;
      k.d_a2 = v * (-0.5 / q + b * d * d / (q * q));
      break;
    }
    case Family::LExp: {
      const double v = sigma2 / q * std::exp(-b * u);
      k.value = v;
      k.d_b = -u * v;
      k.d_lag = -b * sg * v;
      k.d_a2 = -v / q;
      break;
    }
    case Family::LMat: {
      const double p = spec.nu + 0.5;
      const double pref = sigma2 * std::pow(q, -p);
      const auto mt = matern(spec.nu, b * u);
      k.value = pref * mt.m;
      k.d_b = pref * mt.dm * u;
      k.d_lag = pref * mt.dm * b * sg;
      k.d_a2 = -p * k.value / q;
      break;
    }
    case Family::GneitingMatern:
    case Family::GneitingExpSep: {
      const double nu = spec.family == Family::GneitingExpSep ? 0.5 : spec.nu;
      const double qc = a2 + spec.c;
      const double g = std::sqrt(q / qc);
      const double pref = sigma2 * std::sqrt(spec.c) * std::pow(q, -nu) / std::sqrt(qc);
      const auto mt = matern(nu, b * g * u);
      k.value = pref * mt.m;
      k.d_b = pref * mt.dm * g * u;
      k.d_lag = pref * mt.dm * b * g * sg;
      const double dg = 0.5 * g * (1.0 / q - 1.0 / qc);
      k.d_a2 = k.value * (-nu / q - 0.5 / qc) + pref * mt.dm * b * u * dg;
      break;
    }
    case Family::LaplaceScaled: {
      const double rq = std::sqrt(q);
      const double v = sigma2 / rq * std::exp(-b * u / rq);
      k.value = v;
      k.d_b = -u / rq * v;
      k.d_lag = -b / rq * sg * v;
      k.d_a2 = v * (-0.5 / q + 0.5 * b * u / (q * rq));
      break;
    }
    case Family::RationalQuadratic: {
      const double den = q + b * d * d;
      const double v = sigma2 * std::sqrt(q) / den;
      k.value = v;
      k.d_b = -v * d * d / den;
      k.d_lag = -v * 2.0 * b * d / den;
      k.d_a2 = v * (0.5 / q - 1.0 / den);
      break;
    }
    case Family::ComplexExponential: {
      const double v = sigma2 * std::exp(-a2 - b * d * d - a2 * d * d);
      k.value = v;
      k.d_b = -d * d * v;
      k.d_lag = -2.0 * d * (b + a2) * v;
      k.d_a2 = -(1.0 + d * d) * v;
      break;
    }
  }
  return k;
}

double kernel_value(const KernelSpec& spec, double sigma2, double b, double a2, double d) {
  const double q = 1.0 + a2;
  const double u = std::abs(d);
  switch (spec.family) {
    case Family::LRBF: return sigma2 / std::sqrt(q) * std::exp(-b * d * d / q);
    case Family::LExp: return sigma2 / q * std::exp(-b * u);
    case Family::LMat:
      return sigma2 * std::pow(q, -(spec.nu + 0.5)) * matern(spec.nu, b * u).m;
    case Family::GneitingMatern:
    case Family::GneitingExpSep: {
      const double nu = spec.family == Family::GneitingExpSep ? 0.5 : spec.nu;
      const double qc = a2 + spec.c;
      const double g = std::sqrt(q / qc);
      return sigma2 * std::sqrt(spec.c) * std::pow(q, -nu) / std::sqrt(qc) *
             matern(nu, b * g * u).m;
    }
    case Family::LaplaceScaled: {
      const double rq = std::sqrt(q);
      return sigma2 / rq * std::exp(-b * u / rq);
    }
    case Family::RationalQuadratic: return sigma2 * std::sqrt(q) / (q + b * d * d);
    case Family::ComplexExponential:
      return sigma2 * std::exp(-a2 - b * d * d - a2 * d * d);
  }
  return 0.0;
}

double kernel_eval(const KernelSpec& spec, const MultiParams& params, Point x, Point xp) {
  check_spec(spec);
  check_structure(params);
  const int L = params.num_series();
  if (x.series < 1 || x.series > L || xp.series < 1 || xp.series > L) {
    throw ArgumentError("series id outside 1..L");
  }
  if (!std::isfinite(x.t) || !std::isfinite(xp.t)) throw ArgumentError("non-finite time");
  const double a = params.A(x.series - 1, xp.series - 1);
  const double d = (x.t - xp.t) + (params.S[x.series - 1] - params.S[xp.series - 1]);
  return kernel_value(spec, params.sigma2, params.b, a * a, d);
}

double kernel_eval(const KernelSpec& spec, const PairwiseParams& params, Point x, Point xp) {
  if (!std::isfinite(params.a) || params.a < 0.0) throw ValidationError("a must be >= 0");
  if (!std::isfinite(params.s)) throw ValidationError("s must be finite");
  return kernel_eval(spec, MultiParams::from_pairwise(params), x, xp);
}

std::vector<Point> points_of(const TimeSeriesSet& set) {
  std::vector<Point> pts;
  pts.reserve(set.size());
  for (const auto& o : set.observations()) pts.push_back({o.t, o.series});
  return pts;
}

Eigen::MatrixXd covariance_matrix(const KernelSpec& spec, const MultiParams& params,
                                  const std::vector<Point>& pts, bool include_noise) {
  check_spec(spec);
  check_structure(params);
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int lj = pts[j].series - 1;
    for (Eigen::Index i = j; i < n; ++i) {
      const int li = pts[i].series - 1;
      const double a = params.A(li, lj);
      const double d = (pts[i].t - pts[j].t) + (params.S[li] - params.S[lj]);
      K(i, j) = K(j, i) = kernel_value(spec, params.sigma2, params.b, a * a, d);
    }
    if (include_noise) K(j, j) += params.tau2;
  }
  return K;
}

Eigen::MatrixXd covariance_matrix(const KernelSpec& spec, const MultiParams& params,
                                  const TimeSeriesSet& set, bool include_noise) {
  if (set.num_series() > params.num_series()) {
    throw ArgumentError("data has more series than the parameter set");
  }
  return covariance_matrix(spec, params, points_of(set), include_noise);
}

Eigen::MatrixXd cross_covariance(const KernelSpec& spec, const MultiParams& params,
                                 const std::vector<Point>& rows,
                                 const std::vector<Point>& cols) {
  check_spec(spec);
  check_structure(params);
  Eigen::MatrixXd K(rows.size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const int li = rows[i].series - 1;
      const int lj = cols[j].series - 1;
      const double a = params.A(li, lj);
      const double d = (rows[i].t - cols[j].t) + (params.S[li] - params.S[lj]);
      K(i, j) = kernel_value(spec, params.sigma2, params.b, a * a, d);
    }
  }
  return K;
}

std::complex<double> spectral_density(const KernelSpec& spec, const MultiParams& params,
                                      double omega, int l, int lp) {
  check_structure(params);
  const int L = params.num_series();
  if (l < 1 || l > L || lp < 1 || lp > L) throw ArgumentError("series id outside 1..L");
  const double a = params.A(l - 1, lp - 1);
  const double q = 1.0 + a * a;
  const double b = params.b;
  double magnitude = 0.0;
  switch (spec.family) {
    case Family::LRBF:
      magnitude = params.sigma2 / std::sqrt(2.0 * b) * std::exp(-q * omega * omega / (4.0 * b));
      break;
    case Family::LExp:
    case Family::LMat: {
      const double nu = spec.family == Family::LExp ? 0.5 : spec.nu;
      if (!supported_nu(nu)) throw ArgumentError("unsupported smoothness");
      const double p = nu + 0.5;
      const double norm = std::numbers::sqrt2 * std::tgamma(p) / std::tgamma(nu);
      magnitude = params.sigma2 * norm * std::pow(b, 2.0 * nu) /
                  (std::pow(q, p) * std::pow(b * b + omega * omega, p));
      break;
    }
    default:
      throw ArgumentError("no closed-form spectral density for " + family_name(spec.family));
  }
  const double phase = omega * (params.S[l - 1] - params.S[lp - 1]);
  return std::polar(magnitude, phase);
}

std::vector<Violation> validate_params(const PairwiseParams& p) {
  std::vector<Violation> v;
  auto positive = [&](const char* name, double x, bool strict) {
    if (!std::isfinite(x) || (strict ? x <= 0.0 : x < 0.0)) {
      v.push_back({"positivity", {}, std::isfinite(x) ? -x : INFINITY,
                   std::string(name) + (strict ? " must be > 0" : " must be >= 0")});
    }
  };
  positive("sigma2", p.sigma2, true);
  positive("b", p.b, true);
  positive("a", p.a, false);
  positive("tau2", p.tau2, false);
  if (!std::isfinite(p.s)) v.push_back({"finiteness", {}, INFINITY, "s must be finite"});
  return v;
}

std::vector<Violation> validate_params(const MultiParams& p, double tol) {
  std::vector<Violation> v;
  auto positive = [&](const char* name, double x, bool strict) {
    if (!std::isfinite(x) || (strict ? x <= 0.0 : x < 0.0)) {
      v.push_back({"positivity", {}, std::isfinite(x) ? -x : INFINITY,
                   std::string(name) + (strict ? " must be > 0" : " must be >= 0")});
    }
  };
  positive("sigma2", p.sigma2, true);
  positive("b", p.b, true);
  positive("tau2", p.tau2, false);
  const int L = p.num_series();
  if (p.A.rows() != L || p.A.cols() != L) {
    v.push_back({"shape", {}, 0.0, "A must be L x L with L = |S|"});
    return v;
  }
  if (L >= 1 && p.S[0] != 0.0) {
    v.push_back({"baseline_lag", {1}, std::abs(p.S[0]), "S[1] must be 0"});
  }
  for (int i = 0; i < L; ++i) {
    if (!std::isfinite(p.S[i])) v.push_back({"finiteness", {i + 1}, INFINITY, "S not finite"});
    if (p.A(i, i) != 0.0) {
      v.push_back({"zero_diagonal", {i + 1, i + 1}, std::abs(p.A(i, i)),
                   "A diagonal must be 0"});
    }
    for (int j = i + 1; j < L; ++j) {
      if (p.A(i, j) != p.A(j, i)) {
        v.push_back({"symmetry", {i + 1, j + 1}, std::abs(p.A(i, j) - p.A(j, i)),
                     "A must be symmetric"});
      }
      if (!(std::isfinite(p.A(i, j)) && p.A(i, j) > 0.0)) {
        v.push_back({"positivity", {i + 1, j + 1}, -p.A(i, j),
                     "off-diagonal A entries must be > 0"});
      }
    }
  }
  for (int l = 0; l < L; ++l) {
    for (int m = 0; m < L; ++m) {
      for (int k = 0; k < L; ++k) {
        if (l == m || m == k || l == k || l > k) continue;
        const double gap = p.A(l, k) - (p.A(l, m) + p.A(m, k));
        if (gap > tol) {
          v.push_back({"triangle", {l + 1, m + 1, k + 1}, gap,
                       "a(" + std::to_string(l + 1) + "," + std::to_string(m + 1) + ") + a(" +
                           std::to_string(m + 1) + "," + std::to_string(k + 1) + ") < a(" +
                           std::to_string(l + 1) + "," + std::to_string(k + 1) + ")"});
        }
      }
    }
  }
  return v;
}

}  // namespace gplag
