#pragma once

// Censored likelihoods for threshold exceedances and the gradient score.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sedm/data.hpp"
#include "sedm/errors.hpp"
#include "sedm/gpd.hpp"
#include "sedm/model.hpp"
#include "sedm/simulation.hpp"

namespace sedm {

/// Observations mapped to the unit-Fréchet scale at max(x, u), with
/// log-Jacobians and exceedance indicators. Missing entries (NaN) are kept
/// as NaN in `t`.
struct CensoredData {
  Eigen::MatrixXd t;
  Eigen::MatrixXd log_jac;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> exceed;
};

inline CensoredData censor_transform(const SampleMatrix& data, const std::vector<MarginalGPD>& margins) {
  const Eigen::Index n = data.rows(), d = data.cols();
  if (static_cast<std::size_t>(d) != margins.size())
    throw DomainError("censor_transform: one margin per column required");
  CensoredData out{Eigen::MatrixXd(n, d), Eigen::MatrixXd::Zero(n, d),
                   Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, d, false)};
  for (Eigen::Index j = 0; j < d; ++j) {
    const MarginalGPD& m = margins[j];
    const FrechetTransform at_u = marginal_transform(m.u, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = data.data(i, j);
      if (std::isnan(x)) {
        out.t(i, j) = std::numeric_limits<double>::quiet_NaN();
      } else if (x > m.u) {
        const FrechetTransform ft = marginal_transform(x, m);
        out.t(i, j) = ft.t;
        out.log_jac(i, j) = ft.log_jacobian;
        out.exceed(i, j) = true;
      } else {
        out.t(i, j) = at_u.t;
      }
    }
  }
  return out;
}

namespace detail {

// ln of the censored bivariate contribution g, without Jacobian factors.
inline double pair_log_g(const BivariateModel& bm, double y1, double y2, bool e1, bool e2) {
  const auto s = bm.stdf(1.0 / y1, 1.0 / y2);
  const double v = s.value;
  if (!e1 && !e2) return -v;
  if (e1 && !e2) return std::log(s.d1) - 2.0 * std::log(y1) - v;
  if (!e1 && e2) return std::log(s.d2) - 2.0 * std::log(y2) - v;
  // V1 V2 − V12 with V12 = −(density)
  const double la = std::log(s.d1) + std::log(s.d2) - 2.0 * std::log(y1) - 2.0 * std::log(y2);
  const double lb = bm.log_density(y1, y2);
  const double m = std::max(la, lb);
  return m + std::log(std::exp(la - m) + std::exp(lb - m)) - v;
}

inline std::vector<BivariateModel> pair_models(const ModelParams& p) {
  std::vector<BivariateModel> out;
  for (std::size_t j = 0; j < p.dim(); ++j)
    for (std::size_t k = j + 1; k < p.dim(); ++k) {
      const std::size_t idx[2] = {j, k};
      out.emplace_back(p.marginal(idx));
    }
  return out;
}

}  // namespace detail

/// Per-row pairwise composite log-likelihood contributions.
inline Eigen::VectorXd pair_loglik_rows(const CensoredData& cd, const ModelParams& p) {
  const Eigen::Index n = cd.t.rows(), d = cd.t.cols();
  if (static_cast<std::size_t>(d) != p.dim()) throw DomainError("pair_loglik: dimension mismatch");
  const auto models = detail::pair_models(p);
  // Rows censored in both coordinates of a pair share one value.
  std::vector<double> both_censored(models.size(), std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t pair = 0;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = j + 1; k < d; ++k, ++pair) {
        const double y1 = cd.t(i, j), y2 = cd.t(i, k);
        if (std::isnan(y1) || std::isnan(y2)) continue;
        const bool e1 = cd.exceed(i, j), e2 = cd.exceed(i, k);
        double c;
        if (!e1 && !e2) {
          if (std::isnan(both_censored[pair])) both_censored[pair] = detail::pair_log_g(models[pair], y1, y2, false, false);
          c = both_censored[pair];
        } else {
          c = detail::pair_log_g(models[pair], y1, y2, e1, e2);
        }
        if (e1) c += cd.log_jac(i, j);
        if (e2) c += cd.log_jac(i, k);
        if (!std::isfinite(c))
          throw DomainError("pair_loglik: non-finite contribution at row " + std::to_string(i) + ", pair (" +
                            std::to_string(j) + "," + std::to_string(k) + ")");
        acc += c;
      }
    rows(i) = acc;
  }
  return rows;
}

inline double pair_loglik(const CensoredData& cd, const ModelParams& p) { return pair_loglik_rows(cd, p).sum(); }

/// Pairwise censored composite log-likelihood of raw-scale data.
inline double pair_loglik(const SampleMatrix& data, const std::vector<MarginalGPD>& margins, const ModelParams& p) {
  return pair_loglik(censor_transform(data, margins), p);
}

namespace detail {

// Calls f(blocks) for every set partition of `items`.
inline void for_each_partition(const std::vector<std::size_t>& items,
                               const std::function<void(const std::vector<std::vector<std::size_t>>&)>& f) {
  std::vector<std::vector<std::size_t>> blocks;
  std::function<void(std::size_t)> rec = [&](std::size_t pos) {
    if (pos == items.size()) {
      f(blocks);
      return;
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      blocks[b].push_back(items[pos]);
      rec(pos + 1);
      blocks[b].pop_back();
    }
    blocks.push_back({items[pos]});
    rec(pos + 1);
    blocks.pop_back();
  };
  rec(0);
}

}  // namespace detail

/// ln of ∂^{|S|} exp{−V(y)} / Π_{i∈S} ∂y_i, for the exceedance set S.
inline double log_censored_density(std::span<const double> y, const ModelParams& p,
                                   const std::vector<std::size_t>& exceed, double tol = 1e-12) {
  const double v = exponent_measure(y, p, 1e-12);
  if (exceed.empty()) return -v;
  double total = 0.0;
  detail::for_each_partition(exceed, [&](const std::vector<std::vector<std::size_t>>& blocks) {
    double prod = 1.0;
    for (const auto& b : blocks) prod *= -exponent_partial(y, p, b, tol);
    total += prod;
  });
  return std::log(total) - v;
}

/// Full censored log-likelihood for d <= 3. For d = 2 it coincides with the
/// pairwise composite log-likelihood.
inline double full_censored_loglik(const SampleMatrix& data, const std::vector<MarginalGPD>& margins,
                                   const ModelParams& p) {
  if (p.dim() > 3) throw DomainError("full_censored_loglik: only d <= 3 is supported");
  const CensoredData cd = censor_transform(data, margins);
  if (p.dim() == 2) return pair_loglik(cd, p);
  const Eigen::Index n = cd.t.rows(), d = cd.t.cols();
  double total = 0.0;
  std::vector<double> y(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::size_t> s;
    double lj = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      y[j] = cd.t(i, j);
      if (std::isnan(y[j])) throw DomainError("full_censored_loglik: missing values are not supported");
      if (cd.exceed(i, j)) {
        s.push_back(static_cast<std::size_t>(j));
        lj += cd.log_jac(i, j);
      }
    }
    const double c = log_censored_density(y, p, s) + lj;
    if (!std::isfinite(c)) throw DomainError("full_censored_loglik: non-finite contribution at row " + std::to_string(i));
    total += c;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Gradient score

/// ℓ_p norm.
inline double lp_norm(std::span<const double> x, double p) {
  const double m = *std::max_element(x.begin(), x.end());
  if (m <= 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += std::pow(v / m, p);
  return m * std::pow(s, 1.0 / p);
}

/// Weighted gradient score of one unit-Fréchet observation with weights
/// w_i(x) = x_i[1 − exp{−(‖x‖_p/u − 1)}]; zero when ‖x‖_p <= u.
inline double gradient_score_point(std::span<const double> x, const ModelParams& p, double u, double pnorm) {
  const double r = lp_norm(x, pnorm);
  if (!(r > u)) return 0.0;
  const std::size_t d = p.dim();
  const double rho = p.rho();
  const double s = (p.alpha_bar() + rho) / rho;
  const auto q = detail::power_shares(x, p);
  const double ex = std::exp(-(r / u - 1.0));
  double score = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double xi = x[i];
    const double g = (-s * q[i] + p.alpha(i) / rho - 1.0) / xi;
    const double h =
        s * q[i] * q[i] / (rho * xi * xi) - s * q[i] * (1.0 / rho - 1.0) / (xi * xi) - (p.alpha(i) / rho - 1.0) / (xi * xi);
    const double w = xi * (1.0 - ex);
    const double dw = (1.0 - ex) + xi * ex * std::pow(xi / r, pnorm - 1.0) / u;
    score += 2.0 * w * dw * g + w * w * (h + 0.5 * g * g);
  }
  return score;
}

/// Σ_i δ_w(x_i) over observations whose ℓ_p norm exceeds u.
inline double gradient_score(const SampleMatrix& data, const ModelParams& p, double u, double pnorm = 20.0) {
  if (data.scale != Scale::Frechet) throw DomainError("gradient_score: data must be on the Frechet scale");
  if (!(pnorm >= 1.0)) throw DomainError("gradient_score: pnorm must be at least 1");
  if (static_cast<std::size_t>(data.cols()) != p.dim()) throw DomainError("gradient_score: dimension mismatch");
  double total = 0.0;
  std::vector<double> x(p.dim());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < p.dim(); ++j) x[j] = data.data(i, static_cast<Eigen::Index>(j));
    const double v = gradient_score_point(x, p, u, pnorm);
    if (!std::isfinite(v)) throw DomainError("gradient_score: non-finite score at row " + std::to_string(i));
    total += v;
  }
  return total;
}

/// Empirical q-quantile of the row ℓ_p norms; the default risk threshold.
inline double risk_threshold(const SampleMatrix& data, double pnorm = 20.0, double q = 0.9) {
  std::vector<double> norms(static_cast<std::size_t>(data.rows()));
  std::vector<double> x(static_cast<std::size_t>(data.cols()));
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) x[j] = data.data(i, j);
    norms[i] = lp_norm(x, pnorm);
  }
  return quantile_threshold(norms, q);
}

}  // namespace sedm
