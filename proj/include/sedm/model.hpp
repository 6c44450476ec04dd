#pragma once

// The scaled extremal Dirichlet dependence model.
//
// For parameters α = (α_1, …, α_d) > 0 and ρ > −min α, ρ ≠ 0, the stable tail
// dependence function is
//
//   ℓ(x) = E max_i { x_i V_i },   V_i = Z_i^ρ / c(α_i, ρ),   Z_i ~ Gamma(α_i, 1)
//
// with independent Z_i. ρ > 0 gives the positive (negative-logistic / Coles–Tawn
// type) branch, ρ < 0 the negative (logistic type) branch.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sedm/errors.hpp"
#include "sedm/quadrature.hpp"
#include "sedm/random.hpp"
#include "sedm/special_functions.hpp"

namespace sedm {

/// Dependence parameters (α, ρ).
class ModelParams {
 public:
  ModelParams(std::vector<double> alpha, double rho) : alpha_(std::move(alpha)), rho_(rho) {
    if (alpha_.size() < 2) throw DomainError("ModelParams: dimension must be at least 2");
    double amin = alpha_[0];
    for (double a : alpha_) {
      if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("ModelParams: alpha must be positive");
      amin = std::min(amin, a);
    }
    if (!std::isfinite(rho_) || rho_ == 0.0) throw DomainError("ModelParams: rho must be finite and nonzero");
    if (!(rho_ > -amin)) throw DomainError("ModelParams: rho must exceed -min(alpha)");
    alpha_bar_ = std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
    log_c_.resize(alpha_.size());
    for (std::size_t i = 0; i < alpha_.size(); ++i) log_c_[i] = log_rising_factorial(alpha_[i], rho_);
  }

  std::size_t dim() const { return alpha_.size(); }
  const std::vector<double>& alpha() const { return alpha_; }
  double alpha(std::size_t i) const { return alpha_[i]; }
  double rho() const { return rho_; }
  double alpha_bar() const { return alpha_bar_; }
  /// ln c(α_i, ρ)
  double log_c(std::size_t i) const { return log_c_[i]; }

  /// Law of the i-th spectral component V_i: sGa(1/c(α_i, ρ), 1/ρ, α_i).
  ScaledGamma spectral_margin(std::size_t i) const {
    return ScaledGamma(std::exp(-log_c_[i]), 1.0 / rho_, alpha_[i]);
  }

  /// The model restricted to the coordinates in `idx` (at least two).
  ModelParams marginal(std::span<const std::size_t> idx) const {
    std::vector<double> a;
    a.reserve(idx.size());
    for (std::size_t i : idx) a.push_back(alpha_.at(i));
    return ModelParams(std::move(a), rho_);
  }

 private:
  std::vector<double> alpha_;
  double rho_;
  double alpha_bar_ = 0.0;
  std::vector<double> log_c_;
};

/// A point of the unit simplex.
struct SimplexPoint {
  std::vector<double> w;

  explicit SimplexPoint(std::vector<double> coords) : w(std::move(coords)) {
    double s = 0.0;
    for (double v : w) {
      if (!(v >= 0.0)) throw DomainError("SimplexPoint: coordinates must be nonnegative");
      s += v;
    }
    if (std::fabs(s - 1.0) > 1e-12) throw DomainError("SimplexPoint: coordinates must sum to 1");
  }
};

enum class StdfMethod { Auto, Quadrature, Bivariate, IntegerClosedForm };

struct StdfEstimate {
  double estimate;
  double std_error;
};

namespace detail {

inline double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline void require_positive(std::span<const double> x, const char* who) {
  for (double v : x)
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(who) + ": arguments must be positive");
}

inline void require_dim(std::span<const double> x, const ModelParams& p, const char* who) {
  if (x.size() != p.dim()) throw DomainError(std::string(who) + ": dimension mismatch");
}

// ln of the survival function of V_i at v > 0 (ln P(V_i > v)).
inline double spectral_sf(const ModelParams& p, std::size_t i, double log_v) {
  const double z = std::exp((p.log_c(i) + log_v) / p.rho());
  return p.rho() > 0.0 ? reg_inc_gamma_upper(p.alpha(i), z) : reg_inc_gamma_lower(p.alpha(i), z);
}

inline double spectral_cdf(const ModelParams& p, std::size_t i, double log_v) {
  const double z = std::exp((p.log_c(i) + log_v) / p.rho());
  return p.rho() > 0.0 ? reg_inc_gamma_lower(p.alpha(i), z) : reg_inc_gamma_upper(p.alpha(i), z);
}

// ln of the density of V_i at v.
inline double spectral_log_pdf(const ModelParams& p, std::size_t i, double log_v) {
  const double r = p.rho();
  const double lz = (p.log_c(i) + log_v) / r;
  return -std::log(std::fabs(r)) - std::lgamma(p.alpha(i)) - log_v + p.alpha(i) * lz - std::exp(lz);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Bivariate closed forms

/// Closed-form evaluation of the d = 2 model through incomplete beta
/// functions. Caches the Beta normalizers, so construct once per parameter
/// value and reuse across points.
class BivariateModel {
 public:
  struct Stdf {
    double value;  ///< ℓ(x1, x2)
    double d1;     ///< ∂ℓ/∂x1
    double d2;     ///< ∂ℓ/∂x2
  };
  /// V(y) = ℓ(1/y1, 1/y2) and its partial derivatives.
  struct Exponent {
    double v, v1, v2, v12;
  };

  BivariateModel(double alpha1, double alpha2, double rho) : BivariateModel(ModelParams({alpha1, alpha2}, rho)) {}

  explicit BivariateModel(const ModelParams& p) : params_(p) {
    if (p.dim() != 2) throw DomainError("BivariateModel: requires d = 2");
    const double a1 = p.alpha(0), a2 = p.alpha(1), r = p.rho();
    lc1_ = p.log_c(0);
    lc2_ = p.log_c(1);
    if (r > 0.0) {
      lb1_ = log_beta(a2, a1 + r);
      lb2_ = log_beta(a1, a2 + r);
    } else {
      lb1_ = log_beta(a1 + r, a2);
      lb2_ = log_beta(a2 + r, a1);
    }
    log_norm_ = std::lgamma(p.alpha_bar() + r) - std::log(std::fabs(r)) - std::lgamma(a1) - std::lgamma(a2) +
                (a1 / r) * lc1_ + (a2 / r) * lc2_;
  }

  const ModelParams& params() const { return params_; }

  /// ℓ and its gradient at x ≥ 0 (not both zero). ∂ℓ/∂x_i is the
  /// probability that coordinate i attains the maximum under the
  /// size-biased spectral law.
  Stdf stdf(double x1, double x2) const {
    const double a1 = params_.alpha(0), a2 = params_.alpha(1), r = params_.rho();
    const double logk = (std::log(x2) + lc1_ - std::log(x1) - lc2_) / r;
    const double z = 1.0 / (1.0 + std::exp(-logk));
    const double zc = 1.0 / (1.0 + std::exp(logk));
    double p1, p2;
    if (r > 0.0) {
      p1 = detail::reg_inc_beta_lb(zc, a2, a1 + r, lb1_);
      p2 = detail::reg_inc_beta_lb(z, a1, a2 + r, lb2_);
    } else {
      p1 = detail::reg_inc_beta_lb(z, a1 + r, a2, lb1_);
      p2 = detail::reg_inc_beta_lb(zc, a2 + r, a1, lb2_);
    }
    return {x1 * p1 + x2 * p2, p1, p2};
  }

  /// ln of the exponent-measure density −∂²V/∂y1∂y2 = 2·h(y).
  double log_density(double y1, double y2) const {
    const double a1 = params_.alpha(0), a2 = params_.alpha(1), r = params_.rho();
    const double l1 = std::log(y1), l2 = std::log(y2);
    const double e1 = (lc1_ + l1) / r, e2 = (lc2_ + l2) / r;
    const double m = std::max(e1, e2);
    const double log_s = m + std::log(std::exp(e1 - m) + std::exp(e2 - m));
    return log_norm_ - (r + a1 + a2) * log_s + (a1 / r - 1.0) * l1 + (a2 / r - 1.0) * l2;
  }

  Exponent exponent(double y1, double y2) const {
    const Stdf s = stdf(1.0 / y1, 1.0 / y2);
    return {s.value, -s.d1 / (y1 * y1), -s.d2 / (y2 * y2), -std::exp(log_density(y1, y2))};
  }

 private:
  ModelParams params_;
  double lc1_, lc2_, lb1_, lb2_, log_norm_;
};

/// Pickands dependence function A(t) = ℓ(1 − t, t) for d = 2.
inline double pickands(double t, const ModelParams& p) {
  if (p.dim() != 2) throw DomainError("pickands: requires d = 2");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("pickands: t must lie in [0, 1]");
  if (t == 0.0 || t == 1.0) return 1.0;
  return BivariateModel(p).stdf(1.0 - t, t).value;
}

/// Upper tail dependence coefficient 2 − 2A(1/2) of the bivariate model.
inline double upper_tail_coeff(const ModelParams& p) {
  if (p.dim() != 2) throw DomainError("upper_tail_coeff: requires d = 2");
  return 2.0 - 2.0 * pickands(0.5, p);
}

// ---------------------------------------------------------------------------
// Densities and their derivatives

/// ln of the exponent-measure density d·h(x) at x ∈ (0, ∞)^d.
inline double log_density_frechet(std::span<const double> x, const ModelParams& p) {
  detail::require_dim(x, p, "density_frechet");
  detail::require_positive(x, "density_frechet");
  const std::size_t d = p.dim();
  const double r = p.rho();
  std::vector<double> e(d);
  double acc = std::lgamma(p.alpha_bar() + r) - static_cast<double>(d - 1) * std::log(std::fabs(r));
  for (std::size_t i = 0; i < d; ++i) {
    const double lx = std::log(x[i]);
    e[i] = (p.log_c(i) + lx) / r;
    acc += -std::lgamma(p.alpha(i)) + (p.alpha(i) / r) * p.log_c(i) + (p.alpha(i) / r - 1.0) * lx;
  }
  return acc - (r + p.alpha_bar()) * detail::log_sum_exp(e);
}

/// d·h(x): minus the d-th mixed partial of ℓ(1/x).
inline double density_frechet(std::span<const double> x, const ModelParams& p) {
  return std::exp(log_density_frechet(x, p));
}

/// Angular density h on the simplex (w.r.t. Lebesgue measure on the first
/// d − 1 coordinates).
inline double angular_density(const SimplexPoint& w, const ModelParams& p) {
  for (double v : w.w)
    if (!(v > 0.0)) throw DomainError("angular_density: point must be interior to the simplex");
  return std::exp(log_density_frechet(w.w, p)) / static_cast<double>(p.dim());
}

namespace detail {

// Shares q_i = (c_i x_i)^{1/ρ} / Σ_j (c_j x_j)^{1/ρ}.
inline std::vector<double> power_shares(std::span<const double> x, const ModelParams& p) {
  const std::size_t d = p.dim();
  std::vector<double> e(d);
  for (std::size_t i = 0; i < d; ++i) e[i] = (p.log_c(i) + std::log(x[i])) / p.rho();
  const double ls = log_sum_exp(e);
  for (double& v : e) v = std::exp(v - ls);
  return e;
}

}  // namespace detail

/// ∇ ln(d·h(x)).
inline std::vector<double> log_density_grad(std::span<const double> x, const ModelParams& p) {
  detail::require_dim(x, p, "log_density_grad");
  detail::require_positive(x, "log_density_grad");
  const double r = p.rho();
  const auto q = detail::power_shares(x, p);
  std::vector<double> g(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i)
    g[i] = (-(p.alpha_bar() + r) * q[i] / r + p.alpha(i) / r - 1.0) / x[i];
  return g;
}

/// Matrix of second partials ∂² ln(d·h(x)) / ∂x_i ∂x_k.
inline Eigen::MatrixXd log_density_hessian(std::span<const double> x, const ModelParams& p) {
  detail::require_dim(x, p, "log_density_hessian");
  detail::require_positive(x, "log_density_hessian");
  const std::size_t d = p.dim();
  const double r = p.rho();
  const double s = (p.alpha_bar() + r) / r;
  const auto q = detail::power_shares(x, p);
  Eigen::MatrixXd h(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k <= i; ++k) {
      double v = s * (q[i] / x[i]) * (q[k] / (r * x[k]));
      if (i == k) v += -s * (q[i] / x[i]) * (1.0 / r - 1.0) / x[i] - (p.alpha(i) / r - 1.0) / (x[i] * x[i]);
      h(i, k) = v;
      h(k, i) = v;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Stable tail dependence function

/// ℓ(x) by one-dimensional quadrature of ∫_0^∞ [1 − Π_i F_i(t/x_i)] dt, F_i the
/// distribution function of V_i. All x_i must be positive.
inline double stdf_quadrature(std::span<const double> x, const ModelParams& p, double tol = 1e-10) {
  detail::require_dim(x, p, "stdf_quadrature");
  detail::require_positive(x, "stdf_quadrature");
  if (!(tol > 0.0)) throw DomainError("stdf_quadrature: tol must be positive");
  const std::size_t d = p.dim();
  const double scale = std::accumulate(x.begin(), x.end(), 0.0);
  std::vector<double> log_x(d);
  for (std::size_t i = 0; i < d; ++i) log_x[i] = std::log(x[i] / scale);
  auto integrand = [&](double t) {
    const double lt = std::log(t);
    double log_all_below = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double sf = detail::spectral_sf(p, i, lt - log_x[i]);
      if (sf >= 1.0) return 1.0;
      log_all_below += std::log1p(-sf);
    }
    return -std::expm1(log_all_below);
  };
  return scale * integrate_half_line(integrand, tol / scale, 1e-13).value;
}

/// Importance-sampling Monte Carlo estimate of ℓ(x), drawing from the
/// equal-weight mixture of Dirichlet(α + ρ e_j), j = 1..d.
inline StdfEstimate stdf_mc(std::span<const double> x, const ModelParams& p, std::size_t draws,
                            RandomSource& rng) {
  detail::require_dim(x, p, "stdf_mc");
  detail::require_positive(x, "stdf_mc");
  if (draws < 1) throw DomainError("stdf_mc: need at least one draw");
  const std::size_t d = p.dim();
  const double r = p.rho();
  std::vector<double> lz(d), e(d);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t b = 0; b < draws; ++b) {
    const std::size_t j = rng.index(d);
    for (std::size_t i = 0; i < d; ++i) lz[i] = sample_log_gamma(p.alpha(i) + (i == j ? r : 0.0), rng);
    const double lsum = detail::log_sum_exp(lz);
    // e_i = ln(D_i^ρ / c_i)
    for (std::size_t i = 0; i < d; ++i) e[i] = r * (lz[i] - lsum) - p.log_c(i);
    const double emax = *std::max_element(e.begin(), e.end());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double w = std::exp(e[i] - emax);
      num = std::max(num, x[i] * w);
      den += w;
    }
    const double val = num / (den / static_cast<double>(d));
    const double delta = val - mean;
    mean += delta / static_cast<double>(b + 1);
    m2 += delta * (val - mean);
  }
  const double var = draws > 1 ? m2 / static_cast<double>(draws - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(draws))};
}

namespace detail {

inline bool is_integer_valued(const ModelParams& p) {
  for (double a : p.alpha())
    if (a != std::floor(a)) return false;
  return true;
}

// Calls f(j) for every multi-index j with 0 <= j_i < bound_i.
template <class F>
void for_each_multi_index(const std::vector<int>& bound, F&& f) {
  std::vector<int> j(bound.size(), 0);
  for (;;) {
    f(j);
    std::size_t k = 0;
    while (k < j.size() && ++j[k] == bound[k]) j[k++] = 0;
    if (k == j.size()) return;
  }
}

}  // namespace detail

/// Closed form of ℓ for integer α and −1 < ρ < 0 (negative branch, |ρ| < 1).
inline double stdf_integer_negative(std::span<const double> x, const ModelParams& p) {
  detail::require_dim(x, p, "stdf_integer_negative");
  detail::require_positive(x, "stdf_integer_negative");
  if (!detail::is_integer_valued(p)) throw DomainError("stdf_integer_negative: alpha must be integer-valued");
  const double r = -p.rho();
  if (!(r > 0.0 && r < 1.0)) throw DomainError("stdf_integer_negative: requires -1 < rho < 0");
  const std::size_t d = p.dim();
  // z_j = {x_j / c(α_j, −r)}^{1/r}; p.log_c already holds ln c(α_j, −r).
  std::vector<double> lz(d);
  for (std::size_t i = 0; i < d; ++i) lz[i] = (std::log(x[i]) - p.log_c(i)) / r;
  const double lsum = detail::log_sum_exp(lz);
  std::vector<double> log_share(d);
  for (std::size_t i = 0; i < d; ++i) log_share[i] = lz[i] - lsum;
  std::vector<int> bound(d);
  for (std::size_t i = 0; i < d; ++i) bound[i] = static_cast<int>(p.alpha(i));
  const double lg1mr = std::lgamma(1.0 - r);
  double series = 0.0;
  detail::for_each_multi_index(bound, [&](const std::vector<int>& j) {
    int total = 0;
    double lt = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      total += j[i];
      lt += j[i] * log_share[i] - std::lgamma(j[i] + 1.0);
    }
    if (total == 0) return;
    series += std::exp(std::lgamma(total - r) - lg1mr + lt);
  });
  return std::exp(lg1mr + r * lsum) * (1.0 - r * series);
}

/// Closed form of ℓ for integer α and ρ > 0 by inclusion–exclusion over
/// nonempty coordinate subsets.
inline double stdf_integer_positive(std::span<const double> x, const ModelParams& p) {
  detail::require_dim(x, p, "stdf_integer_positive");
  detail::require_positive(x, "stdf_integer_positive");
  if (!detail::is_integer_valued(p)) throw DomainError("stdf_integer_positive: alpha must be integer-valued");
  const double r = p.rho();
  if (!(r > 0.0)) throw DomainError("stdf_integer_positive: requires rho > 0");
  const std::size_t d = p.dim();
  if (d > 10) throw DomainError("stdf_integer_positive: dimension above 10 is not supported");
  // y_i = {x_i / c(α_i, ρ)}^{−1/ρ}
  std::vector<double> ly(d);
  for (std::size_t i = 0; i < d; ++i) ly[i] = -(std::log(x[i]) - p.log_c(i)) / r;
  double total = 0.0;
  for (unsigned mask = 1; mask < (1u << d); ++mask) {
    std::vector<double> sub;
    std::vector<int> bound;
    for (std::size_t i = 0; i < d; ++i)
      if (mask & (1u << i)) {
        sub.push_back(ly[i]);
        bound.push_back(static_cast<int>(p.alpha(i)));
      }
    const double lsum = detail::log_sum_exp(sub);
    double inner = 0.0;
    detail::for_each_multi_index(bound, [&](const std::vector<int>& j) {
      int tot = 0;
      double lt = 0.0;
      for (std::size_t m = 0; m < j.size(); ++m) {
        tot += j[m];
        lt += j[m] * (sub[m] - lsum) - std::lgamma(j[m] + 1.0);
      }
      inner += std::exp(std::lgamma(tot + r) + lt);
    });
    const double sign = (sub.size() % 2 == 1) ? 1.0 : -1.0;
    total += sign * std::exp(-r * lsum) * inner;
  }
  return std::exp(std::lgamma(1.0 + r) - std::lgamma(r)) * total;
}

/// ℓ(x) for x ≥ 0. Zero coordinates are dropped (the model is closed under
/// marginalization); Auto uses the bivariate closed form when two
/// coordinates remain and quadrature otherwise.
inline double stdf(std::span<const double> x, const ModelParams& p, StdfMethod method = StdfMethod::Auto,
                   double tol = 1e-10) {
  detail::require_dim(x, p, "stdf");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0) || !std::isfinite(x[i])) throw DomainError("stdf: arguments must be nonnegative");
    if (x[i] > 0.0) keep.push_back(i);
  }
  if (keep.empty()) return 0.0;
  if (keep.size() == 1) return x[keep[0]];
  std::vector<double> xs;
  for (std::size_t i : keep) xs.push_back(x[i]);
  const ModelParams sub = keep.size() == x.size() ? p : p.marginal(keep);
  switch (method) {
    case StdfMethod::Quadrature:
      return stdf_quadrature(xs, sub, tol);
    case StdfMethod::Bivariate:
      if (sub.dim() != 2) throw DomainError("stdf: bivariate method needs exactly two positive coordinates");
      return BivariateModel(sub).stdf(xs[0], xs[1]).value;
    case StdfMethod::IntegerClosedForm:
      return sub.rho() > 0.0 ? stdf_integer_positive(xs, sub) : stdf_integer_negative(xs, sub);
    case StdfMethod::Auto:
    default:
      if (sub.dim() == 2) return BivariateModel(sub).stdf(xs[0], xs[1]).value;
      return stdf_quadrature(xs, sub, tol);
  }
}

/// Extreme-value copula C(u) = exp{−ℓ(−ln u_1, …, −ln u_d)}.
inline double evc_cdf(std::span<const double> u, const ModelParams& p, StdfMethod method = StdfMethod::Auto) {
  detail::require_dim(u, p, "evc_cdf");
  std::vector<double> x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0 && u[i] <= 1.0)) throw DomainError("evc_cdf: u must lie in (0, 1]");
    x[i] = -std::log(u[i]);
  }
  return std::exp(-stdf(x, p, method));
}

// ---------------------------------------------------------------------------
// Partial derivatives of V(y) = ℓ(1/y)

/// Mixed partial ∂^k V(y) / Π_{i∈subset} ∂y_i by quadrature of
/// −∫ t^k Π_{i∈S} f_i(y_i t) Π_{i∉S} F_i(y_i t) dt, f_i and F_i the density and
/// distribution function of V_i. Valid for any nonempty subset, including
/// the full index set.
inline double exponent_partial_quadrature(std::span<const double> y, const ModelParams& p,
                                          std::span<const std::size_t> subset, double tol = 1e-12) {
  detail::require_dim(y, p, "exponent_partial");
  detail::require_positive(y, "exponent_partial");
  const std::size_t d = p.dim();
  std::vector<char> in(d, 0);
  for (std::size_t i : subset) {
    if (i >= d || in[i]) throw DomainError("exponent_partial: invalid subset");
    in[i] = 1;
  }
  const std::size_t k = subset.size();
  if (k == 0) throw DomainError("exponent_partial: empty subset");
  // V_S(s·y) = s^{−1−k} V_S(y): integrate at unit scale.
  const double scale = std::accumulate(y.begin(), y.end(), 0.0);
  std::vector<double> ly(d);
  for (std::size_t i = 0; i < d; ++i) ly[i] = std::log(y[i] / scale);
  auto integrand = [&](double t) {
    const double lt = std::log(t);
    double acc = static_cast<double>(k) * lt;
    for (std::size_t i = 0; i < d; ++i) {
      const double lv = ly[i] + lt;
      if (in[i]) {
        acc += detail::spectral_log_pdf(p, i, lv);
      } else {
        const double cdf = detail::spectral_cdf(p, i, lv);
        if (cdf <= 0.0) return 0.0;
        acc += std::log(cdf);
      }
    }
    return std::exp(acc);
  };
  const double integral = integrate_half_line(integrand, tol, 1e-12).value;
  return -integral * std::pow(scale, -1.0 - static_cast<double>(k));
}

/// Mixed partial of V over `subset`, using the closed form when the subset
/// is the full index set and the incomplete-beta forms when d = 2.
inline double exponent_partial(std::span<const double> y, const ModelParams& p,
                               std::span<const std::size_t> subset, double tol = 1e-12) {
  detail::require_dim(y, p, "exponent_partial");
  detail::require_positive(y, "exponent_partial");
  if (subset.size() == p.dim()) return -density_frechet(y, p);
  if (p.dim() == 2 && subset.size() == 1) {
    const auto e = BivariateModel(p).exponent(y[0], y[1]);
    return subset[0] == 0 ? e.v1 : e.v2;
  }
  return exponent_partial_quadrature(y, p, subset, tol);
}

/// ∂^k ℓ(1/x) / ∂x_1 ⋯ ∂x_k (the first k coordinates), 1 <= k <= d − 1, by
/// quadrature.
inline double stdf_partials(std::span<const double> x, const ModelParams& p, std::size_t k, double tol = 1e-12) {
  if (k < 1 || k > p.dim() - 1) throw DomainError("stdf_partials: k must lie in [1, d-1]");
  std::vector<std::size_t> subset(k);
  std::iota(subset.begin(), subset.end(), 0);
  return exponent_partial_quadrature(x, p, subset, tol);
}

/// V(y) = ℓ(1/y).
inline double exponent_measure(std::span<const double> y, const ModelParams& p, double tol = 1e-10) {
  detail::require_positive(y, "exponent_measure");
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = 1.0 / y[i];
  return stdf(x, p, StdfMethod::Auto, tol);
}

}  // namespace sedm
