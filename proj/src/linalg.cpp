#include "gplag/linalg.hpp"

#include <cmath>
#include <sstream>

#include "gplag/error.hpp"

namespace gplag {

double CholeskyFactor::log_det() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

namespace {

struct PivotFailure {
  Eigen::Index index;
  double pivot;
};

// Unblocked Cholesky, only used to report where the factorization breaks.
PivotFailure first_bad_pivot(Eigen::MatrixXd A) {
  const Eigen::Index n = A.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = A(j, j) - A.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) return {j, d};
    d = std::sqrt(d);
    A(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      A(i, j) = (A(i, j) - A.row(i).head(j).dot(A.row(j).head(j))) / d;
    }
  }
  return {-1, 0.0};
}

}  // namespace

CholeskyFactor factorize_with_jitter(const Eigen::MatrixXd& K, double scale) {
  CholeskyFactor f;
  if (!K.allFinite()) throw NumericalError("covariance matrix has non-finite entries");
  f.llt.compute(K);
  if (f.llt.info() == Eigen::Success) return f;

  Eigen::MatrixXd J = K;
  for (double level = 1e-8; level <= 1e-2 * (1.0 + 1e-9); level *= 10.0) {
    f.jitter = level * scale;
    J.diagonal() = K.diagonal().array() + f.jitter;
    f.llt.compute(J);
    if (f.llt.info() == Eigen::Success) return f;
  }
  const auto bad = first_bad_pivot(J);
  std::ostringstream msg;
  msg << "Cholesky factorization failed after jitter " << f.jitter << ": pivot " << bad.index
      << " is " << bad.pivot;
  throw NumericalError(msg.str());
}

}  // namespace gplag
