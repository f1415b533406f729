#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gplag/data.hpp"

namespace gplag {

enum class Family {
  LRBF,                // squared-exponential with lag
  LExp,                // exponential with lag
  LMat,                // Matern(nu) with lag
  GneitingMatern,      // Matern with separability c
  GneitingExpSep,      // exponential with separability c
  LaplaceScaled,       // exponential, range scaled by dissimilarity
  RationalQuadratic,
  ComplexExponential,  // Cressie-Huang type, not in the Gneiting family
};

/// Family tag plus its shape constants. `nu` is read by LMat and
/// GneitingMatern and must be 1/2, 3/2 or 5/2; `c` by the two Gneiting
/// separable families.
struct KernelSpec {
  Family family = Family::LExp;
  double nu = 1.5;
  double c = 1.0;
};

std::string family_name(Family f);
Family parse_family(const std::string& name);  // throws ArgumentError
std::string to_string(const KernelSpec& spec);
const std::vector<Family>& all_families();

/// Two-series parameters. `s` enters the lag argument as t - t' + s_l - s_l'
/// with S = (0, s).
struct PairwiseParams {
  double sigma2 = 1.0;
  double b = 1.0;
  double a = 1.0;
  double s = 0.0;
  double tau2 = 0.0;
};

/// L-series parameters: symmetric dissimilarity matrix A (zero diagonal) and
/// lag vector S with S[0] = 0.
struct MultiParams {
  double sigma2 = 1.0;
  double b = 1.0;
  double tau2 = 0.0;
  Eigen::MatrixXd A;
  Eigen::VectorXd S;

  int num_series() const { return static_cast<int>(S.size()); }
  static MultiParams from_pairwise(const PairwiseParams& p);
  PairwiseParams to_pairwise() const;  // requires L == 2
};

struct Point {
  double t;
  int series;  // 1-based
};

/// Kernel value as a function of the lag argument d = t - t' + s_l - s_l'
/// and the squared dissimilarity a^2 of the two series. No validation.
double kernel_value(const KernelSpec& spec, double sigma2, double b, double a2, double d);

/// Value and partial derivatives of kernel_value. For |d| kernels the
/// derivative in d at d = 0 is taken as 0.
struct KernelPartials {
  double value;
  double d_b;
  double d_a2;
  double d_lag;
};
KernelPartials kernel_partials(const KernelSpec& spec, double sigma2, double b, double a2,
                               double d);

/// Checks the shape constants of `spec`; throws ArgumentError.
void check_spec(const KernelSpec& spec);

/// Validated evaluation. Throws ValidationError for invalid parameters and
/// ArgumentError for an unsupported smoothness.
double kernel_eval(const KernelSpec& spec, const MultiParams& params, Point x, Point xp);
double kernel_eval(const KernelSpec& spec, const PairwiseParams& params, Point x, Point xp);

/// Sigma_ij = K(x_i, x_j); tau2 is added to the diagonal when include_noise.
Eigen::MatrixXd covariance_matrix(const KernelSpec& spec, const MultiParams& params,
                                  const TimeSeriesSet& set, bool include_noise);
Eigen::MatrixXd covariance_matrix(const KernelSpec& spec, const MultiParams& params,
                                  const std::vector<Point>& points, bool include_noise);
/// Rectangular K(rows, cols), no noise.
Eigen::MatrixXd cross_covariance(const KernelSpec& spec, const MultiParams& params,
                                 const std::vector<Point>& rows, const std::vector<Point>& cols);

std::vector<Point> points_of(const TimeSeriesSet& set);

/// Fourier transform (1/sqrt(2 pi)) * int exp(-i w t) K((t,l),(0,l')) dt for
/// LRBF, LExp and LMat, including the phase exp(i w (s_l - s_l')).
std::complex<double> spectral_density(const KernelSpec& spec, const MultiParams& params,
                                      double omega, int l, int lp);

struct Violation {
  std::string constraint;  // "positivity", "symmetry", "zero_diagonal", ...
  std::vector<int> indices;  // 1-based series ids where relevant
  double amount;             // size of the violation
  std::string message;
};

/// Every violated constraint, empty when valid. Triangle inequalities are
/// checked with absolute slack `tol`.
std::vector<Violation> validate_params(const PairwiseParams& p);
std::vector<Violation> validate_params(const MultiParams& p, double tol = 1e-12);

}  // namespace gplag
