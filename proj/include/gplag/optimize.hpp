#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gplag {

/// Objective to minimise. Writes the gradient into `grad` (already sized)
/// and returns the value; may return +inf or NaN for an infeasible point.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct OptimizerOptions {
  int max_iter = 500;
  double grad_tol = 1e-6;     // projected-gradient infinity norm
  double rel_tol = 1e-10;     // relative change in f ...
  int rel_window = 3;         // ... sustained over this many iterations
  int memory = 10;
  double armijo = 1e-4;
  int max_backtracks = 40;
};

struct OptimizerResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> history;  // objective at each accepted iterate
};

/// Limited-memory quasi-Newton minimisation over the box lower <= x <= upper
/// (equal bounds freeze a coordinate). Steps are projected onto the box and
/// accepted only under an Armijo decrease, so `history` is nonincreasing.
OptimizerResult minimize_box_lbfgs(const Objective& f, Eigen::VectorXd x0,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                   const OptimizerOptions& options = {});

Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper);

/// Gradient with components that would leave the box set to zero.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

}  // namespace gplag
