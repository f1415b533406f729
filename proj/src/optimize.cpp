#include "gplag/optimize.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "gplag/error.hpp"

namespace gplag {

Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  Eigen::VectorXd pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (lower[i] == upper[i]) {
      pg[i] = 0.0;
    } else if (x[i] <= lower[i] && g[i] > 0.0) {
      pg[i] = 0.0;
    } else if (x[i] >= upper[i] && g[i] < 0.0) {
      pg[i] = 0.0;
    }
  }
  return pg;
}

namespace {

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

// Two-loop recursion on the free coordinates only.
Eigen::VectorXd lbfgs_direction(const std::deque<Pair>& mem, const Eigen::VectorXd& g,
                                const std::vector<bool>& free) {
  const auto mask = [&](Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!free[i]) v[i] = 0.0;
    }
    return v;
  };
  Eigen::VectorXd q = mask(g);
  std::vector<double> alpha(mem.size());
  for (int k = static_cast<int>(mem.size()) - 1; k >= 0; --k) {
    alpha[k] = mem[k].rho * mask(mem[k].s).dot(q);
    q -= alpha[k] * mask(mem[k].y);
  }
  double gamma = 1.0;
  if (!mem.empty()) {
    const auto s = mask(mem.back().s);
    const auto y = mask(mem.back().y);
    const double yy = y.squaredNorm();
    if (yy > 0.0 && s.dot(y) > 0.0) gamma = s.dot(y) / yy;
  }
  Eigen::VectorXd r = gamma * q;
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const double beta = mem[k].rho * mask(mem[k].y).dot(r);
    r += mask(mem[k].s) * (alpha[k] - beta);
  }
  return -mask(r);
}

}  // namespace

OptimizerResult minimize_box_lbfgs(const Objective& f, Eigen::VectorXd x0,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                   const OptimizerOptions& opt) {
  const Eigen::Index n = x0.size();
  if (lower.size() != n || upper.size() != n) throw ArgumentError("bound size mismatch");
  if ((lower.array() > upper.array()).any()) throw ArgumentError("lower bound above upper");

  OptimizerResult res;
  res.x = project_box(x0, lower, upper);
  res.grad = Eigen::VectorXd::Zero(n);
  res.value = f(res.x, res.grad);
  ++res.evaluations;
  if (!std::isfinite(res.value) || !res.grad.allFinite()) {
    throw OptimizationError("objective is not finite at the starting point");
  }
  res.history.push_back(res.value);

  std::deque<Pair> mem;
  int small_changes = 0;
  Eigen::VectorXd g_new(n);
  for (res.iterations = 0; res.iterations < opt.max_iter;) {
    const Eigen::VectorXd pg = projected_gradient(res.x, res.grad, lower, upper);
    if (pg.lpNorm<Eigen::Infinity>() <= opt.grad_tol) {
      res.converged = true;
      res.message = "projected gradient below tolerance";
      return res;
    }
    std::vector<bool> free(n);
    for (Eigen::Index i = 0; i < n; ++i) free[i] = pg[i] != 0.0;

    Eigen::VectorXd dir = lbfgs_direction(mem, res.grad, free);
    if (!(dir.dot(res.grad) < 0.0)) {
      mem.clear();
      dir = -pg;
    }
    // First step (or after a reset) is scaled to unit length.
    double step = mem.empty() ? std::min(1.0, 1.0 / dir.lpNorm<Eigen::Infinity>()) : 1.0;

    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    for (int bt = 0; bt < opt.max_backtracks; ++bt, step *= 0.5) {
      x_new = project_box(res.x + step * dir, lower, upper);
      const Eigen::VectorXd dx = x_new - res.x;
      if (dx.lpNorm<Eigen::Infinity>() == 0.0) break;
      g_new.setZero();
      f_new = f(x_new, g_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && g_new.allFinite() &&
          f_new <= res.value + opt.armijo * res.grad.dot(dx)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!mem.empty()) {
        mem.clear();
        continue;  // retry along the projected gradient
      }
      res.converged = pg.lpNorm<Eigen::Infinity>() <= 10.0 * opt.grad_tol;
      res.message = "line search failed";
      return res;
    }
    ++res.iterations;

    Pair p{x_new - res.x, g_new - res.grad, 0.0};
    const double sy = p.s.dot(p.y);
    if (sy > 1e-12 * p.s.norm() * p.y.norm()) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (static_cast<int>(mem.size()) > opt.memory) mem.pop_front();
    }

    const double change = std::abs(res.value - f_new) / std::max(1.0, std::abs(res.value));
    res.x = x_new;
    res.value = f_new;
    res.grad = g_new;
    res.history.push_back(f_new);
    small_changes = change <= opt.rel_tol ? small_changes + 1 : 0;
    if (small_changes >= opt.rel_window) {
      res.converged = true;
      res.message = "relative change below tolerance";
      return res;
    }
  }
  const Eigen::VectorXd pg = projected_gradient(res.x, res.grad, lower, upper);
  res.converged = pg.lpNorm<Eigen::Infinity>() <= opt.grad_tol;
  res.message = res.converged ? "projected gradient below tolerance" : "iteration limit reached";
  return res;
}

}  // namespace gplag
