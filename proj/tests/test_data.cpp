#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "sedm/data.hpp"
#include "sedm/random.hpp"

using namespace sedm;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

SeriesTable daily_table(std::size_t n, const std::function<double(std::size_t, std::size_t)>& f) {
  SeriesTable t;
  t.names = {"a", "b"};
  t.values.resize(static_cast<Eigen::Index>(n), 2);
  t.mask.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    // A 12 × 28-day calendar keeps dates valid and increasing.
    t.timestamps.push_back(Date{1900 + static_cast<int>(i / 336), 1 + static_cast<int>(i / 28 % 12),
                                1 + static_cast<int>(i % 28)});
    for (std::size_t j = 0; j < 2; ++j) {
      const double v = f(i, j);
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      t.mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = !std::isnan(v);
    }
  }
  return t;
}

SeriesTable make_table(const std::vector<std::vector<double>>& rows) {
  return daily_table(rows.size(), [&](std::size_t i, std::size_t j) { return rows[i][j]; });
}

}  // namespace

TEST_CASE("csv round trip", "[data]") {
  const std::string text =
      "date,flow_a,flow_b\n"
      "2001-06-01,12.5,0.1\n"
      "2001-06-02,,3e-05\n"
      "2001-06-03,1234.0625,17\n";
  std::istringstream in(text);
  const SeriesTable t = parse_csv(in);
  CHECK(t.rows() == 3);
  CHECK(t.names == std::vector<std::string>{"flow_a", "flow_b"});
  CHECK_FALSE(t.mask(1, 0));
  CHECK(std::isnan(t.values(1, 0)));
  CHECK(t.mask(1, 1));
  CHECK(t.values(2, 0) == 1234.0625);
  std::ostringstream out;
  write_csv(t, out);
  CHECK(out.str() == text);
  std::istringstream again(out.str());
  const SeriesTable t2 = parse_csv(again);
  CHECK(t2.values.cwiseEqual(t.values).count() == 5);

  std::ostringstream s;
  const double awkward = 0.1 + 0.2;
  SeriesTable u = t;
  u.values(0, 0) = awkward;
  write_csv(u, s);
  std::istringstream back(s.str());
  CHECK(parse_csv(back).values(0, 0) == awkward);
}

TEST_CASE("csv errors", "[data]") {
  {
    std::istringstream in("date,a,b\n2001-06-01,1.0,2.0\n2001-06-02,1.0,abc\n");
    CHECK_THROWS_WITH(parse_csv(in), ContainsSubstring("line 3") && ContainsSubstring("'b'"));
  }
  {
    std::istringstream in("date,a\n2001-06-02,1.0\n2001-06-01,1.0\n");
    CHECK_THROWS_AS(parse_csv(in), ParseError);
  }
  {
    std::istringstream in("date,a\n2001-13-02,1.0\n");
    CHECK_THROWS_AS(parse_csv(in), ParseError);
  }
  {
    std::istringstream in("date,a\n2001-06-02,1.0,3.0\n");
    CHECK_THROWS_WITH(parse_csv(in), ContainsSubstring("line 2"));
  }
  CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("sample csv", "[data]") {
  Eigen::MatrixXd m(2, 3);
  m << 1.0 / 3.0, 2.5, 1e-300, 7.0, 1e300, 0.1;
  std::ostringstream out;
  write_sample_csv(SampleMatrix(m, Scale::Frechet), out);
  CHECK(out.str().rfind("y1,y2,y3\n", 0) == 0);
  std::istringstream in(out.str());
  const SampleMatrix back = parse_sample_csv(in, Scale::Frechet);
  CHECK(back.data == m);
  std::ostringstream empty;
  write_sample_csv(SampleMatrix(Eigen::MatrixXd(0, 2), Scale::Frechet), empty);
  CHECK(empty.str() == "y1,y2\n");
}

TEST_CASE("quantile_threshold", "[data]") {
  const std::vector<double> v{3.0, 1.0, 2.0};
  CHECK(quantile_threshold(v, 0.5) == 2.0);
  CHECK(quantile_threshold(v, 0.0) == 1.0);
  CHECK(quantile_threshold(v, 1.0) == 3.0);
  CHECK(quantile_threshold(v, 0.25) == 1.5);
  CHECK_THROWS_AS(quantile_threshold(std::vector<double>{}, 0.5), DomainError);
  CHECK_THROWS_AS(quantile_threshold(v, 1.5), DomainError);

  RandomSource rng(301);
  std::vector<double> u(100);
  for (auto& x : u) x = rng.uniform();
  CHECK_THAT(quantile_threshold(u, 0.92), WithinAbs(0.92, 0.05));
  double prev = -1.0;
  for (double q = 0.0; q <= 1.0; q += 0.01) {
    const double t = quantile_threshold(u, q);
    CHECK(t >= prev);
    prev = t;
  }
}

TEST_CASE("runs declustering", "[data]") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SECTION("isolated exceedance") {
    const SeriesTable t = make_table({{0, 0}, {5, 0}, {0, 0}, {0, 0}});
    const auto r = decluster_runs(t, {1.0, 1.0}, 3);
    REQUIRE(r.sizes.size() == 1);
    CHECK(r.maxima.values(0, 0) == 5.0);
    CHECK(r.maxima.timestamps[0] == t.timestamps[1]);
  }
  SECTION("separated exceedances") {
    const SeriesTable t = make_table({{5, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 7}, {0, 0}});
    CHECK(decluster_runs(t, {1.0, 1.0}, 3).sizes.size() == 2);
    CHECK(decluster_runs(t, {1.0, 1.0}, 4).sizes.size() == 1);
    const auto joined = decluster_runs(t, {1.0, 1.0}, 4);
    CHECK(joined.maxima.values(0, 0) == 5.0);
    CHECK(joined.maxima.values(0, 1) == 7.0);
  }
  SECTION("missing values count as quiet") {
    const SeriesTable t = make_table({{5, 0}, {nan, nan}, {0, nan}, {3, 2}});
    CHECK(decluster_runs(t, {1.0, 1.0}, 2).sizes.size() == 2);
    CHECK(decluster_runs(t, {1.0, 1.0}, 3).sizes.size() == 1);
  }
  SECTION("all quiet") {
    const SeriesTable t = make_table({{0, 0}, {0, 0}});
    const auto r = decluster_runs(t, {1.0, 1.0}, 1);
    CHECK(r.sizes.empty());
    CHECK(r.maxima.rows() == 0);
    CHECK_THROWS_AS(decluster_runs(t, {1.0, 1.0}, 0), DomainError);
  }
  SECTION("agreement with a brute-force count on an autoregressive series") {
    RandomSource rng(302);
    std::vector<double> a(1000), b(1000);
    double za = 0.0, zb = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) {
      const double common = rng.normal();
      za = 0.8 * za + 0.6 * (0.7 * common + 0.7 * rng.normal());
      zb = 0.8 * zb + 0.6 * (0.7 * common + 0.7 * rng.normal());
      a[i] = za;
      b[i] = zb;
    }
    const SeriesTable t = daily_table(1000, [&](std::size_t i, std::size_t j) {
      if (i % 97 == 5 && j == 1) return std::numeric_limits<double>::quiet_NaN();
      return j == 0 ? a[i] : b[i];
    });
    const std::vector<double> thr{quantile_threshold(a, 0.9), quantile_threshold(b, 0.9)};
    for (std::size_t run : {1, 2, 3, 7}) {
      std::vector<std::size_t> hits;
      for (std::size_t i = 0; i < 1000; ++i) {
        bool e = false;
        for (std::size_t j = 0; j < 2; ++j)
          if (t.mask(i, j) && t.values(i, j) > thr[j]) e = true;
        if (e) hits.push_back(i);
      }
      std::size_t clusters = hits.empty() ? 0 : 1;
      for (std::size_t k = 1; k < hits.size(); ++k)
        if (hits[k] - hits[k - 1] - 1 >= run) ++clusters;
      const auto r = decluster_runs(t, thr, run);
      CHECK(r.sizes.size() == clusters);
      std::size_t total = 0;
      for (auto s : r.sizes) total += s;
      CHECK(total == hits.size());
      for (std::size_t c = 0; c < r.sizes.size(); ++c)
        for (std::size_t j = 0; j < 2; ++j)
          for (std::size_t i = r.first[c]; i <= r.last[c]; ++i)
            if (t.mask(i, j)) CHECK(r.maxima.values(c, j) >= t.values(i, j));
    }
  }
}

TEST_CASE("declustered series", "[data]") {
  const SeriesTable t = make_table({{0, 0}, {5, 0}, {0, 2}, {3, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 9}, {0, 0}});
  const auto dc = decluster_runs(t, {1.0, 1.0}, 2);
  REQUIRE(dc.sizes.size() == 2);
  const SeriesTable s = declustered_series(t, dc);
  REQUIRE(s.rows() == 7);
  s.validate();
  CHECK(s.values(0, 0) == 0.0);
  CHECK(s.values(1, 0) == 5.0);
  CHECK(s.values(1, 1) == 2.0);
  CHECK(s.timestamps[1] == t.timestamps[1]);
  CHECK(s.timestamps[2] == t.timestamps[4]);
  CHECK(s.values(5, 1) == 9.0);
  CHECK(s.timestamps[6] == t.timestamps[8]);
  const auto none = decluster_runs(t, {100.0, 100.0}, 1);
  CHECK(declustered_series(t, none).values == t.values);
}

TEST_CASE("month filter", "[data]") {
  std::istringstream in(
      "date,a\n2001-05-31,1\n2001-06-01,2\n2001-07-15,3\n2001-08-31,4\n2001-09-01,5\n2002-06-10,6\n");
  const SeriesTable t = filter_months(parse_csv(in), {6, 7, 8});
  REQUIRE(t.rows() == 4);
  CHECK(t.values(0, 0) == 2.0);
  CHECK(t.values(3, 0) == 6.0);
  CHECK_NOTHROW(t.validate());
}
