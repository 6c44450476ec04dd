#pragma once

// Exact simulation of scaled extremal Dirichlet max-stable vectors and the
// auxiliary samplers used to validate the model.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sedm/errors.hpp"
#include "sedm/model.hpp"
#include "sedm/random.hpp"
#include "sedm/special_functions.hpp"

namespace sedm {

enum class Scale { Raw, Frechet, Uniform };

/// n × d observations on a declared scale.
struct SampleMatrix {
  Eigen::MatrixXd data;
  Scale scale = Scale::Raw;

  SampleMatrix() = default;
  SampleMatrix(Eigen::MatrixXd m, Scale s) : data(std::move(m)), scale(s) { validate(); }

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }

  void validate() const {
    if (scale == Scale::Frechet && data.size() > 0 && !(data.array() > 0.0).all())
      throw DomainError("SampleMatrix: Frechet-scale entries must be positive");
    if (scale == Scale::Uniform && data.size() > 0 && !((data.array() > 0.0) && (data.array() < 1.0)).all())
      throw DomainError("SampleMatrix: Uniform-scale entries must lie in (0, 1)");
  }
};

/// Simulated sample with per-row proposal counts.
struct SimulationResult {
  SampleMatrix sample;
  std::vector<std::uint64_t> proposals;

  double mean_proposals() const {
    if (proposals.empty()) return 0.0;
    double s = 0.0;
    for (auto p : proposals) s += static_cast<double>(p);
    return s / static_cast<double>(proposals.size());
  }
};

namespace detail {

// ln W_j = ρ ln Z_j − ln c(α_j, ρ), with Z_j ~ Gamma(α_j + ρ·1{j = tilted}).
inline void draw_log_spectral(const ModelParams& p, std::size_t tilted, RandomSource& rng,
                              std::vector<double>& lw) {
  const std::size_t d = p.dim();
  lw.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double shape = p.alpha(j) + (j == tilted ? p.rho() : 0.0);
    lw[j] = p.rho() * sample_log_gamma(shape, rng) - p.log_c(j);
  }
}

}  // namespace detail

/// One draw from the angular distribution on the simplex.
inline SimplexPoint sample_angular(const ModelParams& p, RandomSource& rng) {
  std::vector<double> lw;
  detail::draw_log_spectral(p, rng.index(p.dim()), rng, lw);
  const double ls = detail::log_sum_exp(lw);
  std::vector<double> s(lw.size());
  double total = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) total += (s[j] = std::exp(lw[j] - ls));
  for (double& v : s) v /= total;
  return SimplexPoint(std::move(s));
}

/// Self-normalized j0-th extremal function (0-based j0): coordinate j0 is 1.
inline std::vector<double> sample_extremal_profile(std::size_t j0, const ModelParams& p, RandomSource& rng) {
  if (j0 >= p.dim()) throw DomainError("sample_extremal_profile: index out of range");
  std::vector<double> lw;
  detail::draw_log_spectral(p, j0, rng, lw);
  std::vector<double> out(lw.size());
  for (std::size_t j = 0; j < lw.size(); ++j) out[j] = j == j0 ? 1.0 : std::exp(lw[j] - lw[j0]);
  return out;
}

/// Exact simulation through the spectral representation: a Poisson record
/// process with angular increments, stopped once no further point can
/// exceed the current minimum. Since d·S_j <= d, that happens when
/// d/E < min Y.
inline SimulationResult sample_maxstable_spectral(const ModelParams& p, std::size_t n, RandomSource& rng) {
  const std::size_t d = p.dim();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::uint64_t> counts(n, 0);
  const double dd = static_cast<double>(d);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = y.row(static_cast<Eigen::Index>(r));
    double e = rng.exponential();
    while (dd / e > row.minCoeff()) {
      const SimplexPoint s = sample_angular(p, rng);
      ++counts[r];
      for (std::size_t j = 0; j < d; ++j) row(j) = std::max(row(j), dd * s.w[j] / e);
      e += rng.exponential();
    }
  }
  return {SampleMatrix(std::move(y), Scale::Frechet), std::move(counts)};
}

/// Exact simulation by sequential sampling of the extremal functions.
inline SimulationResult sample_maxstable_extremal(const ModelParams& p, std::size_t n, RandomSource& rng) {
  const std::size_t d = p.dim();
  Eigen::MatrixXd y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::uint64_t> counts(n, 0);
  std::vector<double> lw;
  for (std::size_t r = 0; r < n; ++r) {
    auto row = y.row(static_cast<Eigen::Index>(r));
    detail::draw_log_spectral(p, 0, rng, lw);
    ++counts[r];
    double e = rng.exponential();
    for (std::size_t j = 0; j < d; ++j) row(j) = std::exp(lw[j] - lw[0]) / e;
    for (std::size_t k = 1; k < d; ++k) {
      e = rng.exponential();
      while (1.0 / e > row(k)) {
        detail::draw_log_spectral(p, k, rng, lw);
        ++counts[r];
        bool accept = true;
        for (std::size_t i = 0; i < k && accept; ++i) accept = std::exp(lw[i] - lw[k]) / e < row(i);
        if (accept)
          for (std::size_t j = 0; j < d; ++j) row(j) = std::max(row(j), std::exp(lw[j] - lw[k]) / e);
        e += rng.exponential();
      }
    }
  }
  return {SampleMatrix(std::move(y), Scale::Frechet), std::move(counts)};
}

/// Law of the radial part R of a Liouville vector R·D_α.
struct RadialSpec {
  enum class Kind {
    Pareto,         ///< P(R > r) = r^{−shape}, r ≥ 1
    InversePareto,  ///< P(1/R > r) = r^{−shape}, r ≥ 1
    Gamma,          ///< R ~ Gamma(shape, 1)
    Constant        ///< R ≡ shape
  };
  Kind kind;
  double shape;

  static RadialSpec pareto(double s) { return {Kind::Pareto, s}; }
  static RadialSpec inverse_pareto(double s) { return {Kind::InversePareto, s}; }
  static RadialSpec gamma(double s) { return {Kind::Gamma, s}; }
  static RadialSpec constant(double s) { return {Kind::Constant, s}; }

  void validate() const {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("RadialSpec: parameter must be positive");
  }

  double sample(RandomSource& rng) const {
    switch (kind) {
      case Kind::Pareto:
        return std::exp(-std::log(rng.uniform()) / shape);
      case Kind::InversePareto:
        return std::exp(std::log(rng.uniform()) / shape);
      case Kind::Gamma:
        return sample_gamma(shape, rng);
      case Kind::Constant:
      default:
        return shape;
    }
  }

  /// P(R <= r).
  double cdf(double r) const {
    switch (kind) {
      case Kind::Pareto:
        return r <= 1.0 ? 0.0 : -std::expm1(-shape * std::log(r));
      case Kind::InversePareto:
        return r <= 0.0 ? 0.0 : (r >= 1.0 ? 1.0 : std::exp(shape * std::log(r)));
      case Kind::Gamma:
        return r <= 0.0 ? 0.0 : reg_inc_gamma_lower(shape, r);
      case Kind::Constant:
      default:
        return r >= shape ? 1.0 : 0.0;
    }
  }
};

/// Draws from the Liouville vector R·D_α, with D_α Dirichlet(α) built from
/// normalized independent Gamma variables.
inline SampleMatrix sample_liouville(const std::vector<double>& alpha, const RadialSpec& radial, std::size_t n,
                                     RandomSource& rng) {
  radial.validate();
  if (alpha.size() < 2) throw DomainError("sample_liouville: dimension must be at least 2");
  for (double a : alpha)
    if (!(a > 0.0)) throw DomainError("sample_liouville: alpha must be positive");
  const std::size_t d = alpha.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<double> lg(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) lg[j] = sample_log_gamma(alpha[j], rng);
    const double ls = detail::log_sum_exp(lg);
    const double radius = radial.sample(rng);
    for (std::size_t j = 0; j < d; ++j)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = radius * std::exp(lg[j] - ls);
  }
  return SampleMatrix(std::move(x), Scale::Raw);
}

/// u = exp(−1/y), entrywise.
inline SampleMatrix frechet_to_uniform(const SampleMatrix& m) {
  if (m.scale != Scale::Frechet) throw DomainError("frechet_to_uniform: expected Frechet scale");
  Eigen::MatrixXd u = (-m.data.array().inverse()).exp().matrix();
  return SampleMatrix(std::move(u), Scale::Uniform);
}

/// y = −1/ln u, entrywise.
inline SampleMatrix uniform_to_frechet(const SampleMatrix& m) {
  if (m.scale != Scale::Uniform) throw DomainError("uniform_to_frechet: expected Uniform scale");
  Eigen::MatrixXd y = (-m.data.array().log().inverse()).matrix();
  return SampleMatrix(std::move(y), Scale::Frechet);
}

}  // namespace sedm
