#pragma once

// Time-series tables, CSV input/output, runs declustering and empirical
// thresholds.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sedm/errors.hpp"
#include "sedm/simulation.hpp"

namespace sedm {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Calendar date (ISO-8601 YYYY-MM-DD).
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  static Date parse(std::string_view s) {
    Date d;
    auto field = [&](std::size_t pos, std::size_t len, int& out) {
      if (pos + len > s.size()) return false;
      auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
      return r.ec == std::errc() && r.ptr == s.data() + pos + len;
    };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !field(0, 4, d.year) || !field(5, 2, d.month) ||
        !field(8, 2, d.day) || d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
      throw ParseError("invalid date '" + std::string(s) + "'");
    return d;
  }

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

/// Named real-valued series sharing a strictly increasing time index.
/// Missing entries hold NaN and are flagged invalid in `mask`.
struct SeriesTable {
  std::string index_name = "date";
  std::vector<Date> timestamps;
  std::vector<std::string> names;
  Eigen::MatrixXd values;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;

  std::size_t rows() const { return timestamps.size(); }
  std::size_t cols() const { return names.size(); }

  void validate() const {
    if (static_cast<std::size_t>(values.rows()) != timestamps.size() ||
        static_cast<std::size_t>(values.cols()) != names.size() || mask.rows() != values.rows() ||
        mask.cols() != values.cols())
      throw DomainError("SeriesTable: inconsistent dimensions");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
      if (!(timestamps[i - 1] < timestamps[i])) throw DomainError("SeriesTable: timestamps must be strictly increasing");
  }

  SampleMatrix to_sample() const { return SampleMatrix(values, Scale::Raw); }
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace detail

inline SeriesTable parse_csv(std::istream& in) {
  SeriesTable t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("read_csv: empty input");
  auto head = detail::split_csv_line(detail::trim(line));
  if (head.size() < 2) throw ParseError("read_csv: need a timestamp column and at least one series");
  t.index_name = std::string(detail::trim(head[0]));
  for (std::size_t j = 1; j < head.size(); ++j) t.names.emplace_back(detail::trim(head[j]));
  const std::size_t d = t.names.size();
  std::vector<double> vals;
  std::vector<char> valid;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    auto cells = detail::split_csv_line(trimmed);
    if (cells.size() != d + 1)
      throw ParseError("read_csv: line " + std::to_string(lineno) + ": expected " + std::to_string(d + 1) +
                       " fields, found " + std::to_string(cells.size()));
    Date date;
    try {
      date = Date::parse(detail::trim(cells[0]));
    } catch (const ParseError& e) {
      throw ParseError("read_csv: line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!t.timestamps.empty() && !(t.timestamps.back() < date))
      throw ParseError("read_csv: line " + std::to_string(lineno) + ": timestamps must be strictly increasing");
    t.timestamps.push_back(date);
    for (std::size_t j = 0; j < d; ++j) {
      const auto cell = detail::trim(cells[j + 1]);
      double v = std::numeric_limits<double>::quiet_NaN();
      if (cell.empty()) {
        valid.push_back(0);
      } else if (detail::parse_double(cell, v) && std::isfinite(v)) {
        valid.push_back(1);
      } else {
        throw ParseError("read_csv: line " + std::to_string(lineno) + ", column '" + t.names[j] +
                         "': malformed number '" + std::string(cell) + "'");
      }
      vals.push_back(valid.back() ? v : std::numeric_limits<double>::quiet_NaN());
    }
  }
  const auto n = static_cast<Eigen::Index>(t.timestamps.size());
  t.values.resize(n, static_cast<Eigen::Index>(d));
  t.mask.resize(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) {
      t.values(i, j) = vals[i * d + j];
      t.mask(i, j) = valid[i * d + j] != 0;
    }
  return t;
}

inline SeriesTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("read_csv: cannot open '" + path + "'");
  return parse_csv(in);
}

inline void write_csv(const SeriesTable& t, std::ostream& out) {
  out << t.index_name;
  for (const auto& n : t.names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < t.rows(); ++i) {
    out << t.timestamps[i].str();
    for (std::size_t j = 0; j < t.cols(); ++j) {
      out << ',';
      if (t.mask(i, j)) out << detail::format_double(t.values(i, j));
    }
    out << '\n';
  }
}

inline void write_csv(const SeriesTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("write_csv: cannot open '" + path + "'");
  write_csv(t, out);
}

/// Sample matrix as CSV with header y1,...,yd.
inline void write_sample_csv(const SampleMatrix& m, std::ostream& out) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? ",y" : "y") << j + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << detail::format_double(m.data(i, j));
    out << '\n';
  }
}

inline void write_sample_csv(const SampleMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("write_sample_csv: cannot open '" + path + "'");
  write_sample_csv(m, out);
}

/// Reads a header-plus-rows numeric CSV; empty cells become NaN.
inline SampleMatrix parse_sample_csv(std::istream& in, Scale scale = Scale::Raw) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("read_sample_csv: empty input");
  const std::size_t d = detail::split_csv_line(detail::trim(line)).size();
  std::vector<double> vals;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    auto cells = detail::split_csv_line(trimmed);
    if (cells.size() != d)
      throw ParseError("read_sample_csv: line " + std::to_string(lineno) + ": expected " + std::to_string(d) + " fields");
    for (std::size_t j = 0; j < d; ++j) {
      const auto cell = detail::trim(cells[j]);
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!cell.empty() && !detail::parse_double(cell, v))
        throw ParseError("read_sample_csv: line " + std::to_string(lineno) + ", column " + std::to_string(j + 1) +
                         ": malformed number '" + std::string(cell) + "'");
      vals.push_back(v);
    }
  }
  const auto n = static_cast<Eigen::Index>(vals.size() / d);
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) m(i, j) = vals[i * d + j];
  return SampleMatrix(std::move(m), scale);
}

inline SampleMatrix read_sample_csv(const std::string& path, Scale scale = Scale::Raw) {
  std::ifstream in(path);
  if (!in) throw ParseError("read_sample_csv: cannot open '" + path + "'");
  return parse_sample_csv(in, scale);
}

// ---------------------------------------------------------------------------
// Thresholds and declustering

/// Empirical q-quantile with linear interpolation between order statistics
/// (positions (n − 1)q). Non-finite entries are ignored.
inline double quantile_threshold(std::span<const double> column, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile_threshold: q must lie in [0, 1]");
  std::vector<double> v;
  for (double x : column)
    if (std::isfinite(x)) v.push_back(x);
  if (v.empty()) throw DomainError("quantile_threshold: empty input");
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

struct DeclusterResult {
  SeriesTable maxima;               ///< one row per cluster, stamped with its first exceedance
  std::vector<std::size_t> sizes;   ///< exceedance rows per cluster
  std::vector<std::size_t> first;   ///< row index of the first exceedance
  std::vector<std::size_t> last;    ///< row index of the last exceedance
};

/// Joint runs declustering: a cluster starts at a row where some series
/// exceeds its threshold and ends once `run_length` consecutive rows have
/// no exceedance. Missing values count as non-exceedances.
inline DeclusterResult decluster_runs(const SeriesTable& s, const std::vector<double>& thresholds,
                                      std::size_t run_length) {
  if (run_length < 1) throw DomainError("decluster_runs: run_length must be at least 1");
  if (thresholds.size() != s.cols()) throw DomainError("decluster_runs: one threshold per column required");
  const std::size_t n = s.rows(), d = s.cols();
  auto exceeds = [&](std::size_t i) {
    for (std::size_t j = 0; j < d; ++j)
      if (s.mask(i, j) && s.values(i, j) > thresholds[j]) return true;
    return false;
  };
  DeclusterResult out;
  std::size_t i = 0;
  while (i < n) {
    if (!exceeds(i)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    std::size_t last = i, count = 0, quiet = 0;
    for (; i < n && quiet < run_length; ++i) {
      if (exceeds(i)) {
        last = i;
        ++count;
        quiet = 0;
      } else {
        ++quiet;
      }
    }
    out.first.push_back(start);
    out.last.push_back(last);
    out.sizes.push_back(count);
  }
  SeriesTable& m = out.maxima;
  m.index_name = s.index_name;
  m.names = s.names;
  const auto k = static_cast<Eigen::Index>(out.first.size());
  m.values.resize(k, static_cast<Eigen::Index>(d));
  m.mask.resize(k, static_cast<Eigen::Index>(d));
  for (Eigen::Index c = 0; c < k; ++c) {
    m.timestamps.push_back(s.timestamps[out.first[c]]);
    for (std::size_t j = 0; j < d; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      bool any = false;
      for (std::size_t r = out.first[c]; r <= out.last[c]; ++r)
        if (s.mask(r, j)) {
          best = std::max(best, s.values(r, j));
          any = true;
        }
      m.values(c, j) = any ? best : std::numeric_limits<double>::quiet_NaN();
      m.mask(c, j) = any;
    }
  }
  return out;
}

/// The series with each cluster span [first, last] collapsed to its maximum
/// row; rows outside clusters are kept as they are.
inline SeriesTable declustered_series(const SeriesTable& s, const DeclusterResult& dc) {
  SeriesTable out;
  out.index_name = s.index_name;
  out.names = s.names;
  std::vector<std::pair<bool, std::size_t>> src;  // (is cluster, index)
  std::size_t c = 0;
  for (std::size_t i = 0; i < s.rows();) {
    if (c < dc.first.size() && i == dc.first[c]) {
      src.emplace_back(true, c);
      i = dc.last[c] + 1;
      ++c;
    } else {
      src.emplace_back(false, i++);
    }
  }
  const auto k = static_cast<Eigen::Index>(src.size());
  out.values.resize(k, static_cast<Eigen::Index>(s.cols()));
  out.mask.resize(k, static_cast<Eigen::Index>(s.cols()));
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto [cluster, idx] = src[static_cast<std::size_t>(r)];
    const auto at = static_cast<Eigen::Index>(idx);
    const SeriesTable& from = cluster ? dc.maxima : s;
    out.timestamps.push_back(from.timestamps[idx]);
    out.values.row(r) = from.values.row(at);
    out.mask.row(r) = from.mask.row(at);
  }
  return out;
}

/// Rows whose month lies in `months` (1 = January).
inline SeriesTable filter_months(const SeriesTable& s, const std::set<int>& months) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < s.rows(); ++i)
    if (months.count(s.timestamps[i].month)) keep.push_back(i);
  SeriesTable out;
  out.index_name = s.index_name;
  out.names = s.names;
  const auto k = static_cast<Eigen::Index>(keep.size());
  out.values.resize(k, static_cast<Eigen::Index>(s.cols()));
  out.mask.resize(k, static_cast<Eigen::Index>(s.cols()));
  for (Eigen::Index r = 0; r < k; ++r) {
    out.timestamps.push_back(s.timestamps[keep[r]]);
    out.values.row(r) = s.values.row(static_cast<Eigen::Index>(keep[r]));
    out.mask.row(r) = s.mask.row(static_cast<Eigen::Index>(keep[r]));
  }
  return out;
}

}  // namespace sedm
