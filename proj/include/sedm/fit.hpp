#pragma once

// Composite-likelihood fitting of the tail model, Godambe information and
// the composite likelihood ratio test.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sedm/data.hpp"
#include "sedm/errors.hpp"
#include "sedm/gpd.hpp"
#include "sedm/likelihood.hpp"
#include "sedm/model.hpp"
#include "sedm/optimize.hpp"
#include "sedm/random.hpp"

namespace sedm {

enum class DependenceModel { Full, Logistic, NegLogistic, ColesTawn };
enum class MarginMode { TwoStage, Joint };

inline std::string to_string(DependenceModel m) {
  switch (m) {
    case DependenceModel::Logistic:
      return "logistic";
    case DependenceModel::NegLogistic:
      return "neglogistic";
    case DependenceModel::ColesTawn:
      return "ct-dirichlet";
    case DependenceModel::Full:
    default:
      return "full";
  }
}

inline DependenceModel parse_dependence_model(const std::string& s) {
  if (s == "full") return DependenceModel::Full;
  if (s == "logistic") return DependenceModel::Logistic;
  if (s == "neglogistic") return DependenceModel::NegLogistic;
  if (s == "ct-dirichlet") return DependenceModel::ColesTawn;
  throw DomainError("unknown model '" + s + "'");
}

inline std::string to_string(MarginMode m) { return m == MarginMode::Joint ? "joint" : "two-stage"; }

inline MarginMode parse_margin_mode(const std::string& s) {
  if (s == "two-stage") return MarginMode::TwoStage;
  if (s == "joint") return MarginMode::Joint;
  throw DomainError("unknown margin mode '" + s + "'");
}

namespace detail {

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
inline double softplus_inv(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Search box for the dependence parameters: α_i and |ρ| at most this.
constexpr double kParamCap = 1e3;

inline bool inside_box(const ModelParams& p) {
  if (std::fabs(p.rho()) < 1e-6 || std::fabs(p.rho()) > kParamCap) return false;
  for (double a : p.alpha())
    if (a > kParamCap) return false;
  return true;
}

}  // namespace detail

/// Dependence parameters of a (possibly restricted) model, on the natural
/// scale and on an unconstrained scale for optimization.
///
/// Natural layout: full (α_1, …, α_d, ρ); logistic and neglogistic (ρ);
/// ct-dirichlet (α_1, …, α_d).
struct DependenceSpace {
  DependenceModel model;
  std::size_t d;

  std::size_t size() const {
    switch (model) {
      case DependenceModel::Full:
        return d + 1;
      case DependenceModel::ColesTawn:
        return d;
      default:
        return 1;
    }
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    if (model == DependenceModel::Full || model == DependenceModel::ColesTawn)
      for (std::size_t i = 0; i < d; ++i) out.push_back("alpha" + std::to_string(i + 1));
    if (model != DependenceModel::ColesTawn) out.push_back("rho");
    return out;
  }

  ModelParams params(const Eigen::VectorXd& nat) const {
    switch (model) {
      case DependenceModel::Full:
        return ModelParams(std::vector<double>(nat.data(), nat.data() + d), nat(d));
      case DependenceModel::ColesTawn:
        return ModelParams(std::vector<double>(nat.data(), nat.data() + d), 1.0);
      case DependenceModel::Logistic:
        if (!(nat(0) < 0.0)) throw DomainError("logistic model requires rho < 0");
        return ModelParams(std::vector<double>(d, 1.0), nat(0));
      case DependenceModel::NegLogistic:
      default:
        if (!(nat(0) > 0.0)) throw DomainError("neglogistic model requires rho > 0");
        return ModelParams(std::vector<double>(d, 1.0), nat(0));
    }
  }

  Eigen::VectorXd natural(const ModelParams& p) const {
    Eigen::VectorXd v(size());
    if (model == DependenceModel::Full || model == DependenceModel::ColesTawn)
      for (std::size_t i = 0; i < d; ++i) v(i) = p.alpha(i);
    if (model == DependenceModel::Full) v(d) = p.rho();
    if (model == DependenceModel::Logistic || model == DependenceModel::NegLogistic) v(0) = p.rho();
    return v;
  }

  Eigen::VectorXd to_free(const Eigen::VectorXd& nat) const {
    Eigen::VectorXd f(size());
    switch (model) {
      case DependenceModel::Full: {
        const double amin = nat.head(d).minCoeff();
        f.head(d) = nat.head(d).array().log();
        f(d) = detail::softplus_inv(nat(d) + amin);
        break;
      }
      case DependenceModel::ColesTawn:
        f = nat.array().log();
        break;
      case DependenceModel::Logistic:
        f(0) = std::log(-nat(0) / (1.0 + nat(0)));
        break;
      case DependenceModel::NegLogistic:
        f(0) = std::log(nat(0));
        break;
    }
    return f;
  }

  Eigen::VectorXd from_free(const Eigen::VectorXd& f) const {
    Eigen::VectorXd nat(size());
    switch (model) {
      case DependenceModel::Full: {
        nat.head(d) = f.head(d).array().exp();
        nat(d) = -nat.head(d).minCoeff() + detail::softplus(f(d));
        break;
      }
      case DependenceModel::ColesTawn:
        nat = f.array().exp();
        break;
      case DependenceModel::Logistic:
        nat(0) = -detail::logistic(f(0));
        break;
      case DependenceModel::NegLogistic:
        nat(0) = std::exp(f(0));
        break;
    }
    return nat;
  }

  /// Natural parameters at which the model starts its search.
  Eigen::VectorXd default_start() const {
    Eigen::VectorXd v(size());
    switch (model) {
      case DependenceModel::Full:
        v.setOnes();
        v(d) = -0.3;
        break;
      case DependenceModel::ColesTawn:
        v.setConstant(2.0);
        break;
      case DependenceModel::Logistic:
        v(0) = -0.5;
        break;
      case DependenceModel::NegLogistic:
        v(0) = 0.5;
        break;
    }
    return v;
  }
};

struct FitConfig {
  std::vector<double> thresholds;  ///< one per column, data units
  DependenceModel model = DependenceModel::Full;
  MarginMode mode = MarginMode::TwoStage;
  OptimizeOptions optimizer{};
  int restarts = 5;                 ///< total number of starting points, including the default
  double jitter = 0.5;              ///< sd of start perturbations on the unconstrained scale
  std::uint64_t seed = 0;
  bool log_scale_margins = true;    ///< joint mode: optimize ln η (true) or η (false)
  std::vector<Eigen::VectorXd> extra_starts;  ///< natural-scale dependence starts
  std::optional<std::vector<MarginalGPD>> initial_margins;
};

struct FitDiagnostics {
  bool converged = false;
  int evaluations = 0;
  int starts = 0;
  int starts_converged = 0;
  std::string message;
};

struct FitResult {
  DependenceModel model = DependenceModel::Full;
  MarginMode mode = MarginMode::TwoStage;
  std::vector<MarginalGPD> margins;
  std::optional<ModelParams> params;
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<std::string> names;  ///< eta1..etad, xi1..xid, dependence names
  Eigen::VectorXd theta;           ///< natural values in `names` order
  Eigen::VectorXd se;              ///< standard errors, NaN until computed
  std::size_t info_offset = 0;     ///< index in theta of the first parameter covered by H, J, G
  Eigen::MatrixXd H, J, G;         ///< sensitivity, variability and Godambe matrices
  Eigen::MatrixXd cov;             ///< covariance of all of theta
  FitDiagnostics convergence;
  std::uint64_t seed = 0;
  int bootstrap = 0;
  int bootstrap_failures = 0;

  std::size_t dim() const { return margins.size(); }
  DependenceSpace space() const { return {model, margins.size()}; }
};

namespace detail {

inline std::vector<MarginalGPD> margins_from_theta(const Eigen::VectorXd& theta, const std::vector<MarginalGPD>& base) {
  std::vector<MarginalGPD> m = base;
  const std::size_t d = base.size();
  for (std::size_t j = 0; j < d; ++j) {
    m[j].eta = theta(j);
    m[j].xi = theta(d + j);
  }
  return m;
}

inline Eigen::VectorXd assemble_theta(const std::vector<MarginalGPD>& margins, const Eigen::VectorXd& dep) {
  const std::size_t d = margins.size();
  Eigen::VectorXd th(2 * d + dep.size());
  for (std::size_t j = 0; j < d; ++j) {
    th(j) = margins[j].eta;
    th(d + j) = margins[j].xi;
  }
  th.tail(dep.size()) = dep;
  return th;
}

inline std::vector<std::string> theta_names(std::size_t d, const DependenceSpace& sp) {
  std::vector<std::string> n;
  for (std::size_t j = 0; j < d; ++j) n.push_back("eta" + std::to_string(j + 1));
  for (std::size_t j = 0; j < d; ++j) n.push_back("xi" + std::to_string(j + 1));
  for (auto& s : sp.names()) n.push_back(s);
  return n;
}

// Composite log-likelihood at natural theta; −∞ where undefined.
inline double loglik_at(const SampleMatrix& data, const std::vector<MarginalGPD>& base, const DependenceSpace& sp,
                        const Eigen::VectorXd& theta) {
  try {
    const ModelParams p = sp.params(theta.tail(sp.size()));
    if (!inside_box(p)) return -std::numeric_limits<double>::infinity();
    return pair_loglik(data, margins_from_theta(theta, base), p);
  } catch (const std::exception&) {
    return -std::numeric_limits<double>::infinity();
  }
}

inline Eigen::VectorXd loglik_rows_at(const SampleMatrix& data, const std::vector<MarginalGPD>& base,
                                      const DependenceSpace& sp, const Eigen::VectorXd& theta) {
  const ModelParams p = sp.params(theta.tail(sp.size()));
  return pair_loglik_rows(censor_transform(data, margins_from_theta(theta, base)), p);
}

}  // namespace detail

/// Margins fitted one column at a time above the configured thresholds.
inline std::vector<MarginalGPD> fit_margins(const SampleMatrix& data, const std::vector<double>& thresholds) {
  if (thresholds.size() != static_cast<std::size_t>(data.cols()))
    throw DomainError("fit_margins: one threshold per column required");
  std::vector<MarginalGPD> out;
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    std::vector<double> col(data.data.col(j).data(), data.data.col(j).data() + data.rows());
    const GpdFit g = fit_gpd(col, thresholds[j]);
    MarginalGPD m{thresholds[j], g.nu, g.eta, g.xi};
    m.validate();
    out.push_back(m);
  }
  return out;
}

/// Maximizes the pairwise censored composite log-likelihood.
inline FitResult fit_composite(const SampleMatrix& data, const FitConfig& cfg) {
  const std::size_t d = static_cast<std::size_t>(data.cols());
  if (d < 2) throw DomainError("fit_composite: need at least two columns");
  if (cfg.thresholds.size() != d) throw DomainError("fit_composite: one threshold per column required");
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = data.data.col(static_cast<Eigen::Index>(j));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index i = 0; i < col.size(); ++i)
      if (std::isfinite(col(i))) {
        lo = std::min(lo, col(i));
        hi = std::max(hi, col(i));
      }
    if (!(cfg.thresholds[j] >= lo && cfg.thresholds[j] < hi))
      throw DomainError("fit_composite: threshold " + std::to_string(j + 1) + " outside the data range");
  }
  const DependenceSpace sp{cfg.model, d};
  const std::vector<MarginalGPD> margins0 = cfg.initial_margins ? *cfg.initial_margins : fit_margins(data, cfg.thresholds);
  const std::size_t k = sp.size();
  const bool joint = cfg.mode == MarginMode::Joint;

  FitResult res;
  res.model = cfg.model;
  res.mode = cfg.mode;
  res.seed = cfg.seed;
  res.names = detail::theta_names(d, sp);

  // Unconstrained optimization vector: [margins (joint only)] + dependence.
  const std::size_t mdim = joint ? 2 * d : 0;
  const CensoredData fixed_cd = censor_transform(data, margins0);
  auto unpack = [&](const Eigen::VectorXd& f, std::vector<MarginalGPD>& m, Eigen::VectorXd& dep) {
    m = margins0;
    if (joint)
      for (std::size_t j = 0; j < d; ++j) {
        m[j].eta = cfg.log_scale_margins ? std::exp(f(j)) : f(j);
        m[j].xi = f(d + j);
      }
    dep = sp.from_free(f.tail(k));
  };
  int evaluations = 0;
  auto objective = [&](const Eigen::VectorXd& f) {
    ++evaluations;
    try {
      std::vector<MarginalGPD> m;
      Eigen::VectorXd dep;
      unpack(f, m, dep);
      const ModelParams p = sp.params(dep);
      if (!detail::inside_box(p)) return std::numeric_limits<double>::infinity();
      const double ll = joint ? pair_loglik(data, m, p) : pair_loglik(fixed_cd, p);
      return -ll;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<Eigen::VectorXd> starts;
  auto with_margins = [&](const Eigen::VectorXd& depfree) {
    Eigen::VectorXd f(mdim + k);
    for (std::size_t j = 0; j < mdim / 2; ++j) {
      f(j) = cfg.log_scale_margins ? std::log(margins0[j].eta) : margins0[j].eta;
      f(d + j) = margins0[j].xi;
    }
    f.tail(k) = depfree;
    return f;
  };
  const Eigen::VectorXd base = sp.to_free(sp.default_start());
  starts.push_back(with_margins(base));
  for (const auto& e : cfg.extra_starts) starts.push_back(with_margins(sp.to_free(e)));
  RandomSource rng(cfg.seed);
  for (int r = 1; r < cfg.restarts; ++r) {
    Eigen::VectorXd f = base;
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) += cfg.jitter * rng.normal();
    // Alternate the sign of ρ across restarts for the full model.
    if (cfg.model == DependenceModel::Full && r % 2 == 1) {
      Eigen::VectorXd nat = sp.from_free(f);
      nat(d) = std::min(std::fabs(nat(d)), 2.0);
      f = sp.to_free(nat);
    }
    starts.push_back(with_margins(f));
  }

  OptimizeOptions opt = cfg.optimizer;
  OptimizeResult best;
  int converged_starts = 0;
  for (const auto& s : starts) {
    auto r = nelder_mead(objective, s, opt);
    if (r.converged) ++converged_starts;
    if (r.value < best.value) best = r;
  }
  if (!std::isfinite(best.value)) throw ConvergenceError("fit_composite: no feasible starting point");
  // Restart at the best point to shed a possibly degenerate simplex.
  auto polished = nelder_mead(objective, best.x, opt);
  if (polished.value <= best.value) best = polished;

  std::vector<MarginalGPD> mhat;
  Eigen::VectorXd dep;
  unpack(best.x, mhat, dep);
  res.margins = mhat;
  res.params = sp.params(dep);
  res.loglik = -best.value;
  res.theta = detail::assemble_theta(mhat, dep);
  res.se = Eigen::VectorXd::Constant(res.theta.size(), std::numeric_limits<double>::quiet_NaN());
  res.info_offset = joint ? 0 : 2 * d;
  res.convergence.converged = polished.converged;
  res.convergence.evaluations = evaluations;
  res.convergence.starts = static_cast<int>(starts.size());
  res.convergence.starts_converged = converged_starts;
  res.convergence.message = polished.converged ? "converged" : "evaluation budget exhausted";
  return res;
}

// ---------------------------------------------------------------------------
// Derivatives by central differences

namespace detail {

inline double fd_step(double v) { return 1e-4 * (1.0 + std::fabs(v)); }

// Hessian of f over the coordinates in idx.
template <class F>
Eigen::MatrixXd fd_hessian(F&& f, const Eigen::VectorXd& x, const std::vector<Eigen::Index>& idx) {
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd h(m, m);
  const double f0 = f(x);
  for (Eigen::Index a = 0; a < m; ++a) {
    const Eigen::Index i = idx[a];
    const double hi = fd_step(x(i));
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += hi;
    xm(i) -= hi;
    h(a, a) = (f(xp) - 2.0 * f0 + f(xm)) / (hi * hi);
    for (Eigen::Index b = 0; b < a; ++b) {
      const Eigen::Index k = idx[b];
      const double hk = fd_step(x(k));
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp(i) += hi, pp(k) += hk;
      pm(i) += hi, pm(k) -= hk;
      mp(i) -= hi, mp(k) += hk;
      mm(i) -= hi, mm(k) -= hk;
      h(a, b) = h(b, a) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * hi * hk);
    }
  }
  return h;
}

// Mixed block ∂²f/∂x_r∂x_c for r in rows, c in cols (disjoint sets).
template <class F>
Eigen::MatrixXd fd_cross(F&& f, const Eigen::VectorXd& x, const std::vector<Eigen::Index>& rows,
                         const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd h(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const Eigen::Index i = rows[a], k = cols[b];
      const double hi = fd_step(x(i)), hk = fd_step(x(k));
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp(i) += hi, pp(k) += hk;
      pm(i) += hi, pm(k) -= hk;
      mp(i) -= hi, mp(k) += hk;
      mm(i) -= hi, mm(k) -= hk;
      h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * hi * hk);
    }
  return h;
}

// Per-row gradients (n × |idx|) of a row-vector valued function.
template <class F>
Eigen::MatrixXd fd_row_gradients(F&& rows_fn, const Eigen::VectorXd& x, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd g;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const Eigen::Index i = idx[a];
    const double h = fd_step(x(i));
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    const Eigen::VectorXd d = (rows_fn(xp) - rows_fn(xm)) / (2.0 * h);
    if (a == 0) g.resize(d.size(), static_cast<Eigen::Index>(idx.size()));
    g.col(static_cast<Eigen::Index>(a)) = d;
  }
  return g;
}

inline std::vector<Eigen::Index> index_range(Eigen::Index from, Eigen::Index to) {
  std::vector<Eigen::Index> v;
  for (Eigen::Index i = from; i < to; ++i) v.push_back(i);
  return v;
}

// Per-row GPD log-density of the excesses (zero for non-exceedances) at
// margin parameters (η_j, ξ_j) taken from theta.
inline Eigen::VectorXd gpd_rows(const SampleMatrix& data, const std::vector<MarginalGPD>& base, std::size_t j,
                                double eta, double xi) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(data.rows());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double x = data.data(i, static_cast<Eigen::Index>(j));
    if (std::isfinite(x) && x > base[j].u) r(i) = gpd_log_density(x - base[j].u, eta, xi);
  }
  return r;
}

}  // namespace detail

/// Sensitivity matrix: minus the Hessian of the composite log-likelihood at
/// the estimate, over the parameters covered by H, J, G.
inline Eigen::MatrixXd sensitivity(const SampleMatrix& data, const FitResult& fit) {
  const DependenceSpace sp = fit.space();
  auto f = [&](const Eigen::VectorXd& th) { return detail::loglik_at(data, fit.margins, sp, th); };
  const auto idx = detail::index_range(static_cast<Eigen::Index>(fit.info_offset), fit.theta.size());
  return -detail::fd_hessian(f, fit.theta, idx);
}

enum class VarianceMethod { Bootstrap, Sandwich };

struct GodambeOptions {
  VarianceMethod method = VarianceMethod::Bootstrap;
  int bootstrap = 100;
  int bootstrap_restarts = 1;
};

namespace detail {

inline void finish_godambe(FitResult& fit, const Eigen::MatrixXd& H, const Eigen::MatrixXd& cov) {
  const auto off = static_cast<Eigen::Index>(fit.info_offset);
  const Eigen::Index m = fit.theta.size() - off;
  fit.H = 0.5 * (H + H.transpose());
  fit.cov = 0.5 * (cov + cov.transpose());
  const Eigen::MatrixXd ginv = fit.cov.block(off, off, m, m);
  fit.J = fit.H * ginv * fit.H;
  fit.J = 0.5 * (fit.J + fit.J.transpose());
  fit.G = ginv.inverse();
  fit.G = 0.5 * (fit.G + fit.G.transpose());
  fit.se = fit.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace detail

/// Stacked estimating-equation sandwich: GPD scores for the margins and the
/// per-row composite score for the dependence parameters (two-stage), or
/// the per-row composite score for all parameters (joint).
inline void godambe_sandwich(const SampleMatrix& data, FitResult& fit) {
  const DependenceSpace sp = fit.space();
  const std::size_t d = fit.dim();
  const auto p = fit.theta.size();
  const auto off = static_cast<Eigen::Index>(fit.info_offset);
  auto total = [&](const Eigen::VectorXd& th) { return detail::loglik_at(data, fit.margins, sp, th); };
  auto rows = [&](const Eigen::VectorXd& th) { return detail::loglik_rows_at(data, fit.margins, sp, th); };
  const auto all = detail::index_range(0, p);
  const auto dep = detail::index_range(static_cast<Eigen::Index>(2 * d), p);
  const auto mar = detail::index_range(0, static_cast<Eigen::Index>(2 * d));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd scores(data.rows(), p);
  if (fit.mode == MarginMode::Joint) {
    A = -detail::fd_hessian(total, fit.theta, all);
    scores = detail::fd_row_gradients(rows, fit.theta, all);
  } else {
    const auto kdep = static_cast<Eigen::Index>(dep.size());
    A.block(2 * d, 2 * d, kdep, kdep) = -detail::fd_hessian(total, fit.theta, dep);
    A.block(2 * d, 0, kdep, 2 * d) = -detail::fd_cross(total, fit.theta, dep, mar);
    scores.rightCols(kdep) = detail::fd_row_gradients(rows, fit.theta, dep);
    for (std::size_t j = 0; j < d; ++j) {
      auto grows = [&](const Eigen::VectorXd& v) { return detail::gpd_rows(data, fit.margins, j, v(0), v(1)); };
      auto gtot = [&](const Eigen::VectorXd& v) { return grows(v).sum(); };
      Eigen::VectorXd v(2);
      v << fit.theta(j), fit.theta(d + j);
      const std::vector<Eigen::Index> both = {0, 1};
      const Eigen::MatrixXd hg = -detail::fd_hessian(gtot, v, both);
      const Eigen::MatrixXd sg = detail::fd_row_gradients(grows, v, both);
      const std::vector<Eigen::Index> at = {static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(d + j)};
      for (int a = 0; a < 2; ++a) {
        scores.col(at[a]) = sg.col(a);
        for (int b = 0; b < 2; ++b) A(at[a], at[b]) = hg(a, b);
      }
    }
  }
  const Eigen::MatrixXd B = scores.transpose() * scores;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw ConvergenceError("godambe: singular sensitivity matrix");
  const Eigen::MatrixXd Ainv = lu.inverse();
  const Eigen::MatrixXd cov = Ainv * B * Ainv.transpose();
  detail::finish_godambe(fit, A.block(off, off, p - off, p - off), cov);
  fit.bootstrap = 0;
}

/// Nonparametric bootstrap over rows: each replicate repeats the whole
/// fitting procedure. G⁻¹ is the replicate covariance and J = H G⁻¹ H.
inline void godambe_bootstrap(const SampleMatrix& data, const FitConfig& cfg, FitResult& fit, int B,
                              RandomSource& rng, int restarts = 1) {
  if (B < 2) throw DomainError("godambe: need at least two bootstrap replicates");
  const Eigen::Index n = data.rows();
  const auto p = fit.theta.size();
  std::vector<Eigen::VectorXd> reps;
  int failures = 0;
  for (int b = 0; b < B; ++b) {
    RandomSource r = rng.spawn(static_cast<std::uint64_t>(b));
    Eigen::MatrixXd m(n, data.cols());
    for (Eigen::Index i = 0; i < n; ++i) m.row(i) = data.data.row(static_cast<Eigen::Index>(r.index(n)));
    const SampleMatrix boot(std::move(m), Scale::Raw);
    FitConfig c = cfg;
    c.restarts = restarts;
    c.seed = r.seed();
    c.extra_starts.clear();
    c.initial_margins.reset();
    try {
      c.extra_starts.push_back(fit.theta.tail(fit.space().size()));
      if (cfg.mode == MarginMode::Joint) c.initial_margins = fit_margins(boot, cfg.thresholds);
      const FitResult fb = fit_composite(boot, c);
      if (!fb.convergence.converged) {
        ++failures;
        continue;
      }
      reps.push_back(fb.theta);
    } catch (const std::exception&) {
      ++failures;
    }
  }
  if (reps.size() < 2) throw ConvergenceError("godambe: too few successful bootstrap replicates");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  for (const auto& r : reps) mean += r;
  mean /= static_cast<double>(reps.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  for (const auto& r : reps) cov += (r - mean) * (r - mean).transpose();
  cov /= static_cast<double>(reps.size() - 1);
  detail::finish_godambe(fit, sensitivity(data, fit), cov);
  fit.bootstrap = B;
  fit.bootstrap_failures = failures;
}

inline void godambe(const SampleMatrix& data, const FitConfig& cfg, FitResult& fit, const GodambeOptions& opt,
                    RandomSource& rng) {
  if (opt.method == VarianceMethod::Sandwich)
    godambe_sandwich(data, fit);
  else
    godambe_bootstrap(data, cfg, fit, opt.bootstrap, rng, opt.bootstrap_restarts);
}

// ---------------------------------------------------------------------------
// Composite likelihood ratio test

struct LrtResult {
  double stat = 0.0;
  Eigen::VectorXd weights;
  double pvalue = 1.0;
  std::size_t q = 0;
  std::vector<std::string> warnings;
};

/// Indices (in fit.theta of the full model) of the coordinates fixed by the
/// null model.
inline std::vector<Eigen::Index> restricted_indices(const FitResult& full, DependenceModel null_model) {
  if (full.model != DependenceModel::Full)
    throw DomainError("composite_lrt: the alternative must be the full model");
  const auto base = static_cast<Eigen::Index>(2 * full.dim());
  std::vector<Eigen::Index> psi;
  switch (null_model) {
    case DependenceModel::Full:
      break;
    case DependenceModel::Logistic:
    case DependenceModel::NegLogistic:
      for (std::size_t i = 0; i < full.dim(); ++i) psi.push_back(base + static_cast<Eigen::Index>(i));
      break;
    case DependenceModel::ColesTawn:
      psi.push_back(base + static_cast<Eigen::Index>(full.dim()));
      break;
  }
  return psi;
}

/// Likelihood ratio statistic 2{l_C(full) − l_C(null)} with its weighted
/// χ²₁ mixture reference distribution; the p-value is estimated from
/// `draws` Monte Carlo replicates.
inline LrtResult composite_lrt(const FitResult& full, const FitResult& null, RandomSource& rng,
                               std::size_t draws = 100000) {
  if (full.dim() != null.dim()) throw DomainError("composite_lrt: dimension mismatch");
  if (full.mode != null.mode) throw DomainError("composite_lrt: fits use different margin modes");
  const auto psi = restricted_indices(full, null.model);
  LrtResult out;
  out.q = psi.size();
  double stat = 2.0 * (full.loglik - null.loglik);
  if (psi.empty()) {
    out.stat = std::max(stat, 0.0);
    out.pvalue = 1.0;
    return out;
  }
  if (stat < -1e-6) throw ConvergenceError("composite_lrt: negative statistic; the full fit did not reach the optimum");
  out.stat = std::max(stat, 0.0);
  if (full.H.size() == 0 || full.cov.size() == 0) throw DomainError("composite_lrt: full fit lacks Godambe matrices");

  const auto off = static_cast<Eigen::Index>(full.info_offset);
  const Eigen::Index m = full.H.rows();
  std::vector<Eigen::Index> psi_local, lam_local;
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool in = std::find(psi.begin(), psi.end(), i + off) != psi.end();
    (in ? psi_local : lam_local).push_back(i);
  }
  auto sub = [](const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& r, const std::vector<Eigen::Index>& c) {
    Eigen::MatrixXd s(r.size(), c.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) s(i, j) = a(r[i], c[j]);
    return s;
  };
  const Eigen::MatrixXd ginv = full.cov.block(off, off, m, m);
  Eigen::MatrixXd schur = sub(full.H, psi_local, psi_local);
  if (!lam_local.empty())
    schur -= sub(full.H, psi_local, lam_local) * sub(full.H, lam_local, lam_local).inverse() *
             sub(full.H, lam_local, psi_local);
  const Eigen::MatrixXd M = schur * sub(ginv, psi_local, psi_local);
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  out.weights.resize(M.rows());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    double c = es.eigenvalues()(i).real();
    if (c < 0.0) {
      out.warnings.push_back("negative weight " + std::to_string(c) + " clipped at 0");
      c = 0.0;
    }
    out.weights(i) = c;
  }
  std::sort(out.weights.data(), out.weights.data() + out.weights.size(), std::greater<double>());
  std::size_t exceed = 0;
  for (std::size_t b = 0; b < draws; ++b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < out.weights.size(); ++i) {
      const double z = rng.normal();
      s += out.weights(i) * z * z;
    }
    if (s >= out.stat) ++exceed;
  }
  out.pvalue = static_cast<double>(exceed) / static_cast<double>(draws);
  return out;
}

}  // namespace sedm
