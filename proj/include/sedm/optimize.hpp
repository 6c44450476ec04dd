#pragma once

// Derivative-free minimization (Nelder–Mead simplex search).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace sedm {

struct OptimizeOptions {
  int max_evaluations = 4000;
  double f_tol = 1e-9;   ///< spread of simplex values, relative to 1 + |f|
  double x_tol = 1e-5;   ///< simplex diameter (max-norm)
  double initial_step = 0.25;
};

struct OptimizeResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  ///< best value after each iteration
};

/// Minimizes f from x0. Non-finite values are treated as +∞, so infeasible
/// regions can be signalled by returning NaN or ±∞.
template <class F>
OptimizeResult nelder_mead(F&& f, const Eigen::VectorXd& x0, const OptimizeOptions& opt = {}) {
  const Eigen::Index n = x0.size();
  const double inf = std::numeric_limits<double>::infinity();
  OptimizeResult res;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : inf;
  };

  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) pts[i + 1](i) += opt.initial_step;
  for (Eigen::Index i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<Eigen::Index> order(n + 1);
  for (;;) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return vals[a] < vals[b]; });
    {
      std::vector<Eigen::VectorXd> p2(n + 1);
      std::vector<double> v2(n + 1);
      for (Eigen::Index i = 0; i <= n; ++i) {
        p2[i] = pts[order[i]];
        v2[i] = vals[order[i]];
      }
      pts.swap(p2);
      vals.swap(v2);
    }
    res.trace.push_back(vals[0]);

    double diam = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i) diam = std::max(diam, (pts[i] - pts[0]).lpNorm<Eigen::Infinity>());
    const bool flat = std::isfinite(vals[n]) && vals[n] - vals[0] <= opt.f_tol * (1.0 + std::fabs(vals[0]));
    if (flat && diam <= opt.x_tol) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opt.max_evaluations) break;
    ++res.iterations;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - pts[n]);
    const double fr = eval(xr);
    if (fr < vals[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[n]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
      continue;
    }
    if (fr < vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
      continue;
    }
    const bool outside = fr < vals[n];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid)) : Eigen::VectorXd(centroid + 0.5 * (pts[n] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[n])) {
      pts[n] = xc;
      vals[n] = fc;
      continue;
    }
    for (Eigen::Index i = 1; i <= n; ++i) {
      pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
      vals[i] = eval(pts[i]);
    }
  }
  res.x = pts[0];
  res.value = vals[0];
  return res;
}

}  // namespace sedm
