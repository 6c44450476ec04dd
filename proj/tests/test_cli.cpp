#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sedm/sedm.hpp"
#include "stat_utils.hpp"

using namespace sedm;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("sedm_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args) {
  const std::string cmd = std::string(SEDM_CLI_PATH) + " " + args + " >" + path("stdout.txt") + " 2>" + path("stderr.txt");
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json load(const std::string& p) { return json::parse(slurp(p)); }

std::vector<std::vector<std::string>> read_rows(const std::string& p) {
  std::vector<std::vector<std::string>> out;
  std::ifstream f(p);
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(cell);
    if (!line.empty() && line.back() == ',') r.emplace_back();
    out.push_back(r);
  }
  return out;
}

// Daily series on a 12 × 28-day calendar: logistic-model Fréchet events on
// even days, quiet values on odd days.
void write_series(const std::string& p, std::size_t events, std::uint64_t seed) {
  RandomSource rng(seed);
  const auto s = sample_maxstable_extremal(ModelParams({1.0, 1.0}, -0.5), events, rng).sample;
  const std::size_t n = 2 * events;
  SeriesTable t;
  t.names = {"upper", "lower"};
  t.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), 2, 1e-3);
  for (std::size_t i = 0; i < events; ++i) t.values.row(static_cast<Eigen::Index>(2 * i)) = s.data.row(static_cast<Eigen::Index>(i));
  t.mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(static_cast<Eigen::Index>(n), 2, true);
  for (std::size_t i = 0; i < n; ++i)
    t.timestamps.push_back(Date{1950 + static_cast<int>(i / 336), 1 + static_cast<int>(i / 28 % 12),
                                1 + static_cast<int>(i % 28)});
  write_csv(t, p);
}

}  // namespace

TEST_CASE("simulate is reproducible", "[cli]") {
  const std::string flags = "simulate --alpha 0.76,1.65,2.03 --rho -0.32 --n 200 --seed 11 ";
  REQUIRE(run(flags + "--out " + path("a.csv")) == 0);
  REQUIRE(run(flags + "--out " + path("b.csv")) == 0);
  CHECK(slurp(path("a.csv")) == slurp(path("b.csv")));
  const auto rows = read_rows(path("a.csv"));
  REQUIRE(rows.size() == 201);
  CHECK(rows[0] == std::vector<std::string>{"y1", "y2", "y3"});
  const json meta = load(path("a.csv.json"));
  CHECK(meta["schema"] == 1);
  CHECK(meta["seed"] == 11);
  CHECK(meta["algorithm"] == "extremal");
  CHECK(meta["proposal_count_mean"].get<double>() >= 1.0);
  REQUIRE(run("simulate --alpha 0.76,1.65,2.03 --rho -0.32 --n 200 --seed 12 --out " + path("c.csv")) == 0);
  CHECK(slurp(path("a.csv")) != slurp(path("c.csv")));
}

TEST_CASE("simulate algorithms agree downstream", "[cli]") {
  const std::string flags = "simulate --alpha 2,0.5 --rho 0.8 --n 3000 ";
  REQUIRE(run(flags + "--seed 1 --algorithm spectral --out " + path("sp.csv")) == 0);
  REQUIRE(run(flags + "--seed 2 --algorithm extremal --out " + path("ex.csv")) == 0);
  const SampleMatrix a = read_sample_csv(path("sp.csv")), b = read_sample_csv(path("ex.csv"));
  for (Eigen::Index j = 0; j < 2; ++j) {
    std::vector<double> x(a.data.col(j).data(), a.data.col(j).data() + a.rows());
    std::vector<double> y(b.data.col(j).data(), b.data.col(j).data() + b.rows());
    CHECK(testutil::ks_two_sample(x, y).pvalue > 0.01);
  }
}

TEST_CASE("simulate with n = 0 writes only the header", "[cli]") {
  REQUIRE(run("simulate --alpha 1,2 --rho 0.5 --n 0 --out " + path("empty.csv")) == 0);
  CHECK(slurp(path("empty.csv")) == "y1,y2\n");
}

TEST_CASE("invalid parameters exit with status 1", "[cli]") {
  CHECK(run("simulate --alpha 1,2 --rho 0 --n 5 --out " + path("bad.csv")) == 1);
  CHECK_THAT(slurp(path("stderr.txt")), ContainsSubstring("rho"));
  CHECK(run("simulate --alpha 1,2 --rho -1.5 --n 5 --out " + path("bad.csv")) == 1);
  CHECK(run("simulate --alpha 1,x --rho 0.5 --n 5 --out " + path("bad.csv")) == 1);
  CHECK(run("nonsense") == 1);
  CHECK(run("") == 1);
  CHECK(run("eval stdf --alpha 1,2 --rho 0.5 --out " + path("e.csv")) == 1);
}

TEST_CASE("eval stdf keeps going past bad rows", "[cli]") {
  std::ofstream(path("pts.csv")) << "x1,x2\n1,0\n-1,2\n0,1\n1,1\n";
  REQUIRE(run("eval stdf --alpha 2,0.5 --rho 0.8 --points " + path("pts.csv") + " --out " + path("stdf.csv")) == 0);
  const auto rows = read_rows(path("stdf.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"x1", "x2", "value", "error"});
  CHECK_THAT(std::stod(rows[1][2]), WithinAbs(1.0, 1e-12));
  CHECK(rows[2][2].empty());
  CHECK_THAT(rows[2][3], ContainsSubstring("nonnegative"));
  CHECK_THAT(std::stod(rows[3][2]), WithinAbs(1.0, 1e-12));
  const double l11 = std::stod(rows[4][2]);
  CHECK_THAT(l11, WithinAbs(2.0 * pickands(0.5, ModelParams({2.0, 0.5}, 0.8)), 1e-12));
  const json meta = load(path("stdf.csv.json"));
  CHECK(meta["failures"] == 1);
  CHECK(meta["method"] == "auto");
}

TEST_CASE("eval stdf at a unit vector in three dimensions", "[cli]") {
  std::ofstream(path("e1.csv")) << "x1,x2,x3\n1,0,0\n0,0,1\n";
  REQUIRE(run("eval stdf --alpha 0.5,1,3 --rho -0.3 --method quadrature --points " + path("e1.csv") + " --out " +
              path("e1o.csv")) == 0);
  const auto rows = read_rows(path("e1o.csv"));
  CHECK_THAT(std::stod(rows[1][3]), WithinAbs(1.0, 1e-8));
  CHECK_THAT(std::stod(rows[2][3]), WithinAbs(1.0, 1e-8));
}

TEST_CASE("eval lambda", "[cli]") {
  REQUIRE(run("eval lambda --alpha 1,1 --rho -0.25 --out " + path("lam.csv")) == 0);
  const auto rows = read_rows(path("lam.csv"));
  REQUIRE(rows.size() == 2);
  CHECK_THAT(std::stod(rows[1][0]), WithinAbs(2.0 - std::pow(2.0, 0.25), 1e-12));
}

TEST_CASE("eval pickands grid has unit endpoints and an interior minimum", "[cli]") {
  REQUIRE(run("eval pickands --alpha 2,0.5 --rho 0.8 --grid 101 --out " + path("pk.csv")) == 0);
  const auto rows = read_rows(path("pk.csv"));
  REQUIRE(rows.size() == 102);
  std::vector<double> a;
  for (std::size_t i = 1; i < rows.size(); ++i) a.push_back(std::stod(rows[i][1]));
  CHECK_THAT(a.front(), WithinAbs(1.0, 1e-12));
  CHECK_THAT(a.back(), WithinAbs(1.0, 1e-12));
  const auto it = std::min_element(a.begin(), a.end());
  CHECK(it != a.begin());
  CHECK(it != a.end() - 1);
  CHECK(*it < 0.95);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = static_cast<double>(i) / 100.0;
    CHECK(a[i] >= std::max(t, 1.0 - t) - 1e-12);
    CHECK(a[i] <= 1.0 + 1e-12);
  }
}

TEST_CASE("eval angular and density", "[cli]") {
  std::ofstream(path("w.csv")) << "w1,w2\n0.3,0.7\n0,1\n";
  REQUIRE(run("eval angular --alpha 1,1 --rho 1 --points " + path("w.csv") + " --out " + path("ang.csv")) == 0);
  auto rows = read_rows(path("ang.csv"));
  CHECK(rows[0][0] == "w1");
  CHECK_THAT(std::stod(rows[1][2]), WithinAbs(angular_density(SimplexPoint({0.3, 0.7}), ModelParams({1, 1}, 1)), 1e-12));
  CHECK_FALSE(rows[2][3].empty());
  std::ofstream(path("y.csv")) << "x1,x2\n1,1\n";
  REQUIRE(run("eval density --alpha 1,1 --rho 1 --points " + path("y.csv") + " --out " + path("den.csv")) == 0);
  rows = read_rows(path("den.csv"));
  const double y[2] = {1.0, 1.0};
  CHECK_THAT(std::stod(rows[1][2]), WithinAbs(density_frechet(y, ModelParams({1, 1}, 1)), 1e-12));
}

TEST_CASE("fit on a daily series", "[cli]") {
  write_series(path("series.csv"), 3000, 21);
  const std::string flags = "fit --data " + path("series.csv") +
                            " --quantile 0.95 --run-length 1 --model logistic --bootstrap 20 --seed 4 ";
  REQUIRE(run(flags + "--out " + path("fit1.json")) == 0);
  REQUIRE(run(flags + "--out " + path("fit2.json")) == 0);
  CHECK(slurp(path("fit1.json")) == slurp(path("fit2.json")));
  const json f = load(path("fit1.json"));
  CHECK(f["schema"] == 1);
  CHECK(f["model"] == "logistic");
  CHECK(f["converged"] == true);
  CHECK(f["seed"] == 4);
  CHECK(f["params"]["alpha"] == std::vector<double>{1.0, 1.0});
  CHECK(f["names"].back() == "rho");
  CHECK(f["config"]["run_length"] == 1);
  CHECK(f["diagnostics"]["bootstrap"] == 20);
  CHECK(f["thresholds"].size() == 2);
  CHECK(f["data"]["clusters"].get<int>() > 0);
  const double rho = f["params"]["rho"].get<double>();
  const double se = f["se"].back().get<double>();
  CHECK(se > 0.0);
  CHECK(std::fabs(rho + 0.5) < 3.0 * se + 0.05);
  for (const char* m : {"H", "J", "G"}) CHECK(f[m].size() == 1);
}

TEST_CASE("fit with a month filter", "[cli]") {
  write_series(path("series_m.csv"), 1680, 22);
  REQUIRE(run("fit --data " + path("series_m.csv") +
              " --months 6,7,8 --quantile 0.8 --model neglogistic --variance sandwich --out " + path("fm.json")) == 0);
  const json f = load(path("fm.json"));
  CHECK(f["data"]["rows"] == 840);
  CHECK(f["config"]["months"] == "6,7,8");
  CHECK(f["params"]["rho"].get<double>() > 0.0);
}

TEST_CASE("fit reports non-convergence with status 2", "[cli]") {
  REQUIRE(run("simulate --alpha 1,1,1 --rho -0.5 --n 800 --seed 5 --out " + path("nc.csv")) == 0);
  CHECK(run("fit --data " + path("nc.csv") + " --format sample --quantile 0.9 --max-evaluations 5 --restarts 1 --out " +
            path("nc.json")) == 2);
  const json f = load(path("nc.json"));
  CHECK(f["converged"] == false);
  CHECK(f["diagnostics"]["message"] == "evaluation budget exhausted");
}

TEST_CASE("lrt", "[cli]") {
  REQUIRE(run("simulate --alpha 1,1,1 --rho -0.5 --n 1500 --seed 5 --out " + path("l.csv")) == 0);
  const std::string base = "fit --data " + path("l.csv") + " --format sample --quantile 0.9 --variance sandwich ";
  REQUIRE(run(base + "--model full --out " + path("full.json")) == 0);
  REQUIRE(run(base + "--model logistic --out " + path("logi.json")) == 0);

  REQUIRE(run("lrt --full " + path("full.json") + " --null " + path("full.json") + " --out " + path("same.json")) == 0);
  json r = load(path("same.json"));
  CHECK(r["stat"] == 0.0);
  CHECK(r["pvalue"] == 1.0);

  REQUIRE(run("lrt --full " + path("full.json") + " --null " + path("logi.json") + " --seed 3 --out " + path("lr.json")) ==
          0);
  r = load(path("lr.json"));
  CHECK(r["q"] == 3);
  CHECK(r["weights"].size() == 3);
  CHECK(r["stat"].get<double>() >= 0.0);
  CHECK(r["pvalue"].get<double>() > 0.01);
  CHECK_THAT(slurp(path("stdout.txt")), ContainsSubstring("full vs logistic"));

  CHECK(run("lrt --full " + path("logi.json") + " --null " + path("full.json")) == 1);
  REQUIRE(run("simulate --alpha 1,1 --rho -0.5 --n 1500 --seed 5 --out " + path("l2.csv")) == 0);
  REQUIRE(run("fit --data " + path("l2.csv") + " --format sample --quantile 0.9 --variance sandwich --model logistic --out " +
              path("logi2.json")) == 0);
  CHECK(run("lrt --full " + path("full.json") + " --null " + path("logi2.json")) == 1);
  std::ofstream(path("junk.json")) << "{not json";
  CHECK(run("lrt --full " + path("junk.json") + " --null " + path("full.json")) == 1);
}

TEST_CASE("threads flag is validated and echoed", "[cli]") {
  CHECK(run("--threads 0 simulate --alpha 1,2 --rho 0.5 --n 3 --out " + path("t.csv")) == 1);
  REQUIRE(run("--threads 2 simulate --alpha 1,2 --rho 0.5 --n 3 --out " + path("t.csv")) == 0);
  CHECK(load(path("t.csv.json"))["threads"] == 2);
}
