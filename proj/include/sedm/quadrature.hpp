#pragma once

// Globally adaptive Gauss–Kronrod (10/21-point) integration.

#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "sedm/errors.hpp"

namespace sedm {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

// Kronrod abscissae (positive half, descending) and weights; the odd-indexed
// abscissae are the Gauss–Legendre 10-point nodes.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600943698500, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk21(F& f, double a, double b, int& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[10];
  double gauss = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * fsum;
    if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
  }
  evals += 21;
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::fabs(kronrod - gauss)};
}

}  // namespace detail

/// ∫_a^b f. Bisects the worst segment until the summed error estimate is
/// below max(abs_tol, rel_tol·|I|). Throws ConvergenceError when the segment
/// budget runs out first.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                           int max_segments = 2000) {
  QuadratureResult res;
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gk21(f, a, b, res.evaluations));
  double total = heap.top().value;
  double error = heap.top().error;
  int segments = 1;
  while (error > std::max(abs_tol, rel_tol * std::fabs(total))) {
    if (segments >= max_segments)
      throw ConvergenceError("integrate: segment budget exhausted (error " +
                             std::to_string(error) + ")");
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Segment left = detail::gk21(f, worst.a, mid, res.evaluations);
    const detail::Segment right = detail::gk21(f, mid, worst.b, res.evaluations);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++segments;
  }
  // Re-sum to shed accumulated rounding from the running updates.
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  res.value = total;
  res.error = error;
  return res;
}

/// ∫_0^∞ f(t) dt through t = exp(u), u = v/(1 − v²), v ∈ (−1, 1).
/// Suited to integrands living on a log scale around t ≈ 1 with at most
/// algebraic decay at both ends.
template <class F>
QuadratureResult integrate_half_line(F&& f, double abs_tol, double rel_tol = 0.0,
                                     int max_segments = 2000) {
  auto g = [&f](double v) {
    const double w = 1.0 - v * v;
    const double u = v / w;
    if (std::fabs(u) > 700.0) return 0.0;
    const double t = std::exp(u);
    const double val = f(t);
    if (val == 0.0) return 0.0;
    return val * t * (1.0 + v * v) / (w * w);
  };
  return integrate(g, -1.0, 1.0, abs_tol, rel_tol, max_segments);
}

}  // namespace sedm
