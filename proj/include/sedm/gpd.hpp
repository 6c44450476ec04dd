#pragma once

// Generalized Pareto tail model for the margins and its unit-Fréchet
// transform.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "sedm/errors.hpp"
#include "sedm/optimize.hpp"
#include "sedm/simulation.hpp"

namespace sedm {

/// Tail model F̃(x) = 1 − ν{1 + ξ(x − u)/η}_+^{−1/ξ} above the threshold u.
struct MarginalGPD {
  double u = 0.0;    ///< threshold
  double nu = 0.1;   ///< exceedance probability
  double eta = 1.0;  ///< scale
  double xi = 0.0;   ///< shape

  void validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("MarginalGPD: eta must be positive");
    if (!(nu > 0.0 && nu < 1.0)) throw DomainError("MarginalGPD: nu must lie in (0, 1)");
    if (!std::isfinite(u) || !std::isfinite(xi)) throw DomainError("MarginalGPD: u and xi must be finite");
  }

  /// Upper end point of the support (∞ unless ξ < 0).
  double upper_bound() const {
    return xi < 0.0 ? u - eta / xi : std::numeric_limits<double>::infinity();
  }
};

namespace detail {

// ln{1 + ξ z/η}/ξ, continuous at ξ = 0.
inline double gpd_log_term(double z, double eta, double xi) {
  const double a = z / eta;
  if (std::fabs(xi) < 1e-10) return a - 0.5 * xi * a * a;
  return std::log1p(xi * a) / xi;
}

}  // namespace detail

/// ln density of a GPD(η, ξ) excess z >= 0; −∞ outside the support.
inline double gpd_log_density(double z, double eta, double xi) {
  if (!(eta > 0.0) || z < 0.0) return -std::numeric_limits<double>::infinity();
  if (1.0 + xi * z / eta <= 0.0) return -std::numeric_limits<double>::infinity();
  return -std::log(eta) - (1.0 + xi) * detail::gpd_log_term(z, eta, xi);
}

/// GPD quantile of level p for the excess over the threshold.
inline double gpd_quantile(double p, double eta, double xi) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("gpd_quantile: p must lie in [0, 1)");
  const double l = -std::log1p(-p);
  if (std::fabs(xi) < 1e-12) return eta * l;
  return eta * std::expm1(xi * l) / xi;
}

struct GpdFit {
  double eta;
  double xi;
  double nu;
  double loglik;
  std::size_t exceedances;
  bool converged;
  int iterations;
  std::vector<double> trace;  ///< log-likelihood after each optimizer iteration
};

/// Maximum-likelihood GPD fit to the excesses of `data` over `threshold`.
/// Non-finite entries are ignored; ν is the fraction of the finite entries
/// that exceed the threshold.
inline GpdFit fit_gpd(std::span<const double> data, double threshold) {
  std::vector<double> z;
  std::size_t total = 0;
  for (double x : data) {
    if (!std::isfinite(x)) continue;
    ++total;
    if (x > threshold) z.push_back(x - threshold);
  }
  if (z.size() < 10) throw DomainError("fit_gpd: need at least 10 exceedances");
  const auto [zmin, zmax] = std::minmax_element(z.begin(), z.end());
  if (*zmin == *zmax) throw DomainError("fit_gpd: exceedances are all equal");
  const double m = static_cast<double>(z.size());
  double mean = 0.0, var = 0.0;
  for (double v : z) mean += v;
  mean /= m;
  for (double v : z) var += (v - mean) * (v - mean);
  var /= m - 1.0;
  // Method-of-moments start, clamped to a sensible shape range.
  double xi0 = std::clamp(0.5 * (1.0 - mean * mean / var), -0.4, 0.4);
  double eta0 = std::max(mean * (1.0 - xi0), 1e-8 * mean + 1e-300);

  auto negll = [&](const Eigen::VectorXd& th) {
    const double eta = std::exp(th(0)), xi = th(1);
    if (xi <= -1.0) return std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (double v : z) s += gpd_log_density(v, eta, xi);
    return -s;
  };
  Eigen::VectorXd x0(2);
  x0 << std::log(eta0), xi0;
  if (!std::isfinite(negll(x0))) x0(1) = 0.0;
  OptimizeOptions opt;
  opt.initial_step = 0.1;
  opt.f_tol = 1e-12;
  opt.x_tol = 1e-7;
  auto res = nelder_mead(negll, x0, opt);
  // restart from the optimum
  auto res2 = nelder_mead(negll, res.x, opt);
  GpdFit out;
  out.eta = std::exp(res2.x(0));
  out.xi = res2.x(1);
  out.nu = m / static_cast<double>(total);
  out.loglik = -res2.value;
  out.exceedances = z.size();
  out.converged = res.converged && res2.converged;
  out.iterations = res.iterations + res2.iterations;
  for (double v : res.trace) out.trace.push_back(-v);
  for (double v : res2.trace) out.trace.push_back(-v);
  if (!out.converged) throw ConvergenceError("fit_gpd: optimizer did not converge");
  return out;
}

/// Unit-Fréchet transform t = −1/ln F̃(x) of a value x >= u and the
/// Jacobian dt/dx.
struct FrechetTransform {
  double t;
  double jacobian;
  double log_jacobian;
};

inline FrechetTransform marginal_transform(double x, const MarginalGPD& m) {
  m.validate();
  if (!(x >= m.u)) throw DomainError("marginal_transform: x must be at least the threshold");
  const double z = x - m.u;
  if (m.xi < 0.0 && 1.0 + m.xi * z / m.eta <= 0.0)
    throw DomainError("marginal_transform: x beyond the upper support bound");
  const double lt = detail::gpd_log_term(z, m.eta, m.xi);   // −ln of the GPD survival
  const double log_f = std::log1p(-m.nu * std::exp(-lt));  // ln F̃(x)
  const double t = -1.0 / log_f;
  const double log_j = std::log(m.nu) - std::log(m.eta) - (1.0 + m.xi) * lt - 2.0 * std::log(-log_f) - log_f;
  return {t, std::exp(log_j), log_j};
}

/// Maps a unit-Fréchet sample to data units: GPD tail above each threshold
/// (with exceedance probability ν) and a linear ramp of slope η/(1 − ν)
/// below it.
inline SampleMatrix frechet_to_tail_scale(const SampleMatrix& m, const std::vector<MarginalGPD>& margins) {
  if (m.scale != Scale::Frechet) throw DomainError("frechet_to_tail_scale: expected Frechet scale");
  if (static_cast<std::size_t>(m.cols()) != margins.size())
    throw DomainError("frechet_to_tail_scale: one margin per column required");
  Eigen::MatrixXd x(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const MarginalGPD& g = margins[j];
    g.validate();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double y = m.data(i, j);
      // 1 − U and U with U = exp(−1/y)
      const double sf = -std::expm1(-1.0 / y);
      if (sf < g.nu) {
        const double p = 1.0 - sf / g.nu;
        x(i, j) = g.u + gpd_quantile(std::max(p, 0.0), g.eta, g.xi);
      } else {
        x(i, j) = g.u - (sf - g.nu) / (1.0 - g.nu) * g.eta;
      }
    }
  }
  return SampleMatrix(std::move(x), Scale::Raw);
}

}  // namespace sedm
