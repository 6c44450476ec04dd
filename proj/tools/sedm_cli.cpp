#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sedm/sedm.hpp"

using json = nlohmann::ordered_json;
using namespace sedm;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& s, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!detail::parse_double(detail::trim(item), v)) throw UsageError(std::string(flag) + ": bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

std::set<int> parse_months(const std::string& s) {
  std::set<int> out;
  for (double v : parse_list(s, "--months")) {
    if (v != std::floor(v) || v < 1 || v > 12) throw UsageError("--months: months are integers 1..12");
    out.insert(static_cast<int>(v));
  }
  return out;
}

json to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    a.push_back(r);
  }
  return a;
}

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::MatrixXd matrix_from(const json& a) {
  const auto r = static_cast<Eigen::Index>(a.size());
  const auto c = r ? static_cast<Eigen::Index>(a[0].size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = a[i][j].is_null() ? std::nan("") : a[i][j].get<double>();
  return m;
}

Eigen::VectorXd vector_from(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].is_null() ? std::nan("") : a[i].get<double>();
  return v;
}

json params_json(const ModelParams& p) { return {{"alpha", p.alpha()}, {"rho", p.rho()}}; }

void write_json(const json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string alpha, out, algorithm = "extremal";
  double rho = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& a, int threads) {
  const ModelParams p(parse_list(a.alpha, "--alpha"), a.rho);
  RandomSource rng(a.seed);
  SimulationResult r;
  if (a.n == 0) {
    r.sample = SampleMatrix(Eigen::MatrixXd(0, static_cast<Eigen::Index>(p.dim())), Scale::Frechet);
  } else if (a.algorithm == "spectral") {
    r = sample_maxstable_spectral(p, a.n, rng);
  } else {
    r = sample_maxstable_extremal(p, a.n, rng);
  }
  write_sample_csv(r.sample, a.out);
  json meta = {{"schema", 1},
               {"command", "simulate"},
               {"params", params_json(p)},
               {"n", a.n},
               {"seed", a.seed},
               {"algorithm", a.algorithm},
               {"threads", threads},
               {"proposal_count_mean", r.mean_proposals()}};
  write_json(meta, a.out + ".json");
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string what, alpha, points, out, method = "auto";
  double rho = 0.0, tol = 1e-10;
  std::size_t grid = 0;
};

StdfMethod parse_method(const std::string& m) {
  if (m == "auto") return StdfMethod::Auto;
  if (m == "quadrature") return StdfMethod::Quadrature;
  if (m == "bivariate") return StdfMethod::Bivariate;
  if (m == "closed-form") return StdfMethod::IntegerClosedForm;
  throw UsageError("--method: unknown method '" + m + "'");
}

int run_eval(const EvalArgs& a, int threads) {
  const ModelParams p(parse_list(a.alpha, "--alpha"), a.rho);
  const StdfMethod method = parse_method(a.method);
  const auto d = p.dim();
  std::vector<std::string> cols;
  std::vector<std::vector<double>> pts;

  if (a.what == "lambda") {
    cols = {};
    pts.push_back({});
  } else if (a.what == "pickands" && a.grid > 0) {
    if (a.grid < 2) throw UsageError("--grid: at least two points");
    cols = {"t"};
    for (std::size_t i = 0; i < a.grid; ++i) pts.push_back({static_cast<double>(i) / static_cast<double>(a.grid - 1)});
  } else {
    if (a.points.empty()) throw UsageError("eval: --points is required for '" + a.what + "'");
    const SampleMatrix m = read_sample_csv(a.points);
    const std::size_t want = a.what == "pickands" ? 1 : d;
    if (static_cast<std::size_t>(m.cols()) != want)
      throw UsageError("eval: points file needs " + std::to_string(want) + " columns");
    const char* prefix = a.what == "angular" ? "w" : "x";
    if (a.what == "pickands")
      cols = {"t"};
    else
      for (std::size_t j = 0; j < d; ++j) cols.push_back(prefix + std::to_string(j + 1));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::vector<double> r;
      for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m.data(i, j));
      pts.push_back(r);
    }
  }

  auto evaluate = [&](const std::vector<double>& x) -> double {
    if (a.what == "stdf") return stdf(x, p, method, a.tol);
    if (a.what == "angular") return angular_density(SimplexPoint(x), p);
    if (a.what == "density") return density_frechet(x, p);
    if (a.what == "pickands") return pickands(x[0], p);
    if (a.what == "lambda") return upper_tail_coeff(p);
    throw UsageError("eval: unknown quantity '" + a.what + "'");
  };
  if (a.what != "stdf" && a.what != "angular" && a.what != "density" && a.what != "pickands" && a.what != "lambda")
    throw UsageError("eval: unknown quantity '" + a.what + "'");

  std::ofstream f(a.out);
  if (!f) throw UsageError("cannot write '" + a.out + "'");
  for (const auto& c : cols) f << c << ',';
  f << "value,error\n";
  std::size_t failures = 0;
  for (const auto& x : pts) {
    for (double v : x) f << detail::format_double(v) << ',';
    try {
      f << detail::format_double(evaluate(x)) << ",\n";
    } catch (const DomainError& e) {
      ++failures;
      f << ',' << '"' << e.what() << '"' << '\n';
    } catch (const ConvergenceError& e) {
      ++failures;
      f << ',' << '"' << e.what() << '"' << '\n';
    }
  }
  json meta = {{"schema", 1},       {"command", "eval"},     {"what", a.what},
               {"params", params_json(p)}, {"method", a.method}, {"tol", a.tol},
               {"points", pts.size()}, {"failures", failures}, {"threads", threads}};
  write_json(meta, a.out + ".json");
  return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string data, out, model = "full", mode = "two-stage", variance = "bootstrap", format = "series", months;
  double quantile = 0.92, pnorm = 20.0, tol = 1e-9;
  std::size_t run_length = 3;
  int bootstrap = 100, restarts = 5, max_evaluations = 4000;
  std::uint64_t seed = 0;
};

json margins_json(const std::vector<MarginalGPD>& ms) {
  json a = json::array();
  for (const auto& m : ms) a.push_back({{"u", m.u}, {"nu", m.nu}, {"eta", m.eta}, {"xi", m.xi}});
  return a;
}

json fit_json(const FitResult& r) {
  json names = r.names;
  json j = {{"schema", 1},
            {"model", to_string(r.model)},
            {"mode", to_string(r.mode)},
            {"names", names},
            {"theta", to_json(r.theta)},
            {"se", to_json(r.se)},
            {"loglik", r.loglik},
            {"params", r.params ? params_json(*r.params) : json(nullptr)},
            {"margins", margins_json(r.margins)},
            {"info_offset", r.info_offset},
            {"H", to_json(r.H)},
            {"J", to_json(r.J)},
            {"G", to_json(r.G)},
            {"cov", to_json(r.cov)},
            {"converged", r.convergence.converged},
            {"seed", r.seed}};
  j["diagnostics"] = {{"evaluations", r.convergence.evaluations},
                      {"starts", r.convergence.starts},
                      {"starts_converged", r.convergence.starts_converged},
                      {"message", r.convergence.message},
                      {"bootstrap", r.bootstrap},
                      {"bootstrap_failures", r.bootstrap_failures}};
  return j;
}

FitResult fit_from_json(const json& j) {
  try {
    FitResult r;
    r.model = parse_dependence_model(j.at("model").get<std::string>());
    r.mode = parse_margin_mode(j.at("mode").get<std::string>());
    for (const auto& m : j.at("margins"))
      r.margins.push_back({m.at("u").get<double>(), m.at("nu").get<double>(), m.at("eta").get<double>(),
                           m.at("xi").get<double>()});
    r.names = j.at("names").get<std::vector<std::string>>();
    r.theta = vector_from(j.at("theta"));
    r.se = vector_from(j.at("se"));
    r.loglik = j.at("loglik").get<double>();
    r.info_offset = j.at("info_offset").get<std::size_t>();
    r.H = matrix_from(j.at("H"));
    r.J = matrix_from(j.at("J"));
    r.G = matrix_from(j.at("G"));
    r.cov = matrix_from(j.at("cov"));
    r.seed = j.at("seed").get<std::uint64_t>();
    r.convergence.converged = j.at("converged").get<bool>();
    const auto k = r.space().size();
    if (static_cast<std::size_t>(r.theta.size()) != 2 * r.margins.size() + k)
      throw ParseError("fit result: theta has the wrong length");
    r.params = r.space().params(r.theta.tail(static_cast<Eigen::Index>(k)));
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("fit result: ") + e.what());
  }
}

int run_fit(const FitArgs& a, int threads) {
  if (!(a.quantile > 0.0 && a.quantile < 1.0)) throw UsageError("--quantile must lie in (0, 1)");
  if (a.run_length < 1) throw UsageError("--run-length must be at least 1");
  if (a.variance != "bootstrap" && a.variance != "sandwich") throw UsageError("--variance: bootstrap or sandwich");
  if (a.format != "series" && a.format != "sample") throw UsageError("--format: series or sample");

  SampleMatrix data;
  std::vector<double> thresholds;
  json prep;
  if (a.format == "series") {
    SeriesTable t = read_csv(a.data);
    if (t.cols() < 2) throw UsageError("fit: need at least two data columns");
    if (!a.months.empty()) t = filter_months(t, parse_months(a.months));
    for (std::size_t j = 0; j < t.cols(); ++j) {
      std::vector<double> col(t.values.col(static_cast<Eigen::Index>(j)).data(),
                              t.values.col(static_cast<Eigen::Index>(j)).data() + t.rows());
      thresholds.push_back(quantile_threshold(col, a.quantile));
    }
    const DeclusterResult dc = decluster_runs(t, thresholds, a.run_length);
    const SeriesTable kept = declustered_series(t, dc);
    data = kept.to_sample();
    prep = {{"rows", t.rows()}, {"clusters", dc.maxima.rows()}, {"fitted_rows", kept.rows()}, {"columns", t.names}};
  } else {
    data = read_sample_csv(a.data);
    if (data.cols() < 2) throw UsageError("fit: need at least two data columns");
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      std::vector<double> col(data.data.col(j).data(), data.data.col(j).data() + data.rows());
      thresholds.push_back(quantile_threshold(col, a.quantile));
    }
    prep = {{"rows", data.rows()}};
  }

  FitConfig cfg;
  cfg.thresholds = thresholds;
  cfg.model = parse_dependence_model(a.model);
  cfg.mode = parse_margin_mode(a.mode);
  cfg.restarts = a.restarts;
  cfg.seed = a.seed;
  cfg.optimizer.max_evaluations = a.max_evaluations;
  cfg.optimizer.f_tol = a.tol;

  json config = {{"data", a.data},         {"format", a.format},         {"quantile", a.quantile},
                 {"run_length", a.run_length}, {"months", a.months},         {"model", a.model},
                 {"mode", a.mode},         {"variance", a.variance},     {"bootstrap", a.bootstrap},
                 {"restarts", a.restarts}, {"max_evaluations", a.max_evaluations}, {"tol", a.tol},
                 {"pnorm", a.pnorm},       {"threads", threads}};

  FitResult r = fit_composite(data, cfg);
  json out;
  int code = 0;
  if (r.convergence.converged) {
    RandomSource rng(a.seed);
    GodambeOptions g;
    g.method = a.variance == "sandwich" ? VarianceMethod::Sandwich : VarianceMethod::Bootstrap;
    g.bootstrap = a.bootstrap;
    godambe(data, cfg, r, g, rng);
    out = fit_json(r);
  } else {
    out = fit_json(r);
    code = 2;
  }
  out["thresholds"] = thresholds;
  out["data"] = prep;
  out["config"] = config;
  if (code == 2) std::cerr << "sedm fit: " << r.convergence.message << '\n';
  write_json(out, a.out);
  return code;
}

// ---------------------------------------------------------------------------

struct LrtArgs {
  std::string full, null, out;
  std::uint64_t seed = 0;
  std::size_t draws = 100000;
};

int run_lrt(const LrtArgs& a) {
  const FitResult full = fit_from_json(read_json(a.full));
  const FitResult null = fit_from_json(read_json(a.null));
  if (full.model != DependenceModel::Full) throw UsageError("lrt: the alternative must be a full-model fit");
  if (full.dim() != null.dim() || full.mode != null.mode)
    throw UsageError("lrt: fits are not nested (dimension or margin mode differ)");
  RandomSource rng(a.seed);
  const LrtResult r = composite_lrt(full, null, rng, a.draws);
  json out = {{"schema", 1},
              {"full", to_string(full.model)},
              {"null", to_string(null.model)},
              {"stat", r.stat},
              {"weights", to_json(r.weights)},
              {"pvalue", r.pvalue},
              {"q", r.q},
              {"draws", a.draws},
              {"seed", a.seed},
              {"warnings", r.warnings}};
  std::printf("%s vs %s: stat = %.4f, p = %.4f (q = %zu)\n", to_string(full.model).c_str(),
              to_string(null.model).c_str(), r.stat, r.pvalue, r.q);
  if (!a.out.empty()) write_json(out, a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scaled extremal Dirichlet max-stable models"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "exact simulation on the unit Frechet scale");
  sim->add_option("--alpha", sa.alpha, "a1,a2,...")->required();
  sim->add_option("--rho", sa.rho)->required();
  sim->add_option("--n", sa.n)->required();
  sim->add_option("--seed", sa.seed);
  sim->add_option("--algorithm", sa.algorithm)->check(CLI::IsMember({"spectral", "extremal"}));
  sim->add_option("--out", sa.out)->required();

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "evaluate model functions");
  ev->add_option("what", ea.what, "stdf|angular|density|pickands|lambda")->required();
  ev->add_option("--alpha", ea.alpha)->required();
  ev->add_option("--rho", ea.rho)->required();
  ev->add_option("--points", ea.points, "CSV of points");
  ev->add_option("--grid", ea.grid, "pickands grid size");
  ev->add_option("--method", ea.method, "auto|quadrature|bivariate|closed-form");
  ev->add_option("--tol", ea.tol);
  ev->add_option("--out", ea.out)->required();

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "censored pairwise composite likelihood fit");
  fit->add_option("--data", fa.data)->required();
  fit->add_option("--format", fa.format, "series|sample");
  fit->add_option("--quantile", fa.quantile);
  fit->add_option("--run-length", fa.run_length);
  fit->add_option("--months", fa.months, "e.g. 6,7,8");
  fit->add_option("--model", fa.model, "full|logistic|neglogistic|ct-dirichlet");
  fit->add_option("--mode", fa.mode, "two-stage|joint");
  fit->add_option("--bootstrap", fa.bootstrap);
  fit->add_option("--variance", fa.variance, "bootstrap|sandwich");
  fit->add_option("--restarts", fa.restarts)->check(CLI::PositiveNumber);
  fit->add_option("--max-evaluations", fa.max_evaluations)->check(CLI::PositiveNumber);
  fit->add_option("--pnorm", fa.pnorm);
  fit->add_option("--tol", fa.tol);
  fit->add_option("--seed", fa.seed);
  fit->add_option("--out", fa.out)->required();

  LrtArgs la;
  auto* lrt = app.add_subcommand("lrt", "composite likelihood ratio test");
  lrt->add_option("--full", la.full)->required();
  lrt->add_option("--null", la.null)->required();
  lrt->add_option("--data", "accepted for reproducibility records");
  lrt->add_option("--draws", la.draws);
  lrt->add_option("--seed", la.seed);
  lrt->add_option("--out", la.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*sim) return run_simulate(sa, threads);
    if (*ev) return run_eval(ea, threads);
    if (*fit) return run_fit(fa, threads);
    if (*lrt) return run_lrt(la);
  } catch (const ConvergenceError& e) {
    std::cerr << "sedm: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sedm: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
