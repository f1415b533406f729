#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace gplag {

/// Lower-triangular factor of a covariance matrix plus the diagonal jitter
/// that was needed to obtain it.
struct CholeskyFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;

  double log_det() const;
  Eigen::MatrixXd lower() const { return llt.matrixL(); }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt.solve(b); }
};

/// Factorizes K; on failure adds 1e-8*scale to the diagonal and escalates by
/// x10 up to 1e-2*scale. Throws NumericalError naming the smallest failing
/// pivot when every level fails.
CholeskyFactor factorize_with_jitter(const Eigen::MatrixXd& K, double scale);

}  // namespace gplag
