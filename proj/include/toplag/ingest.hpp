#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "toplag/date.hpp"
#include "toplag/error.hpp"

namespace toplag {

struct Observation {
  Date date;
  double value = 0.0;
};

/// A named, date-ordered series as read from disk.
struct RawSeries {
  std::string name;
  std::vector<Observation> points;
  std::size_t dropped_rows = 0;  // rows skipped for an empty value cell

  std::size_t size() const { return points.size(); }
};

enum class Transform { log_return, difference, none };
enum class Frequency { none, weekly, monthly };

inline const char* to_string(Transform t) {
  switch (t) {
    case Transform::log_return: return "logret";
    case Transform::difference: return "diff";
    case Transform::none: return "none";
  }
  return "?";
}

inline const char* to_string(Frequency f) {
  switch (f) {
    case Frequency::none: return "none";
    case Frequency::weekly: return "weekly";
    case Frequency::monthly: return "monthly";
  }
  return "?";
}

/// Two equal-length, date-aligned series ready for lead-lag analysis.
/// x is the first (leading when lags are positive) series, y the second.
struct AlignedPair {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::string> dates;
  Transform transform_applied = Transform::none;
  bool standardized = false;

  std::size_t n() const { return x.size(); }

  /// Roles exchanged: y becomes the first series.
  AlignedPair swapped() const {
    AlignedPair out = *this;
    std::swap(out.x, out.y);
    return out;
  }
};

struct ParseOptions {
  std::size_t min_rows = 4;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads one (date, value) column pair from a comma-separated file with a
/// header row. Rows whose value cell is empty are dropped and counted; the
/// result is sorted by date.
inline RawSeries parse_csv(const std::string& path, std::string_view date_col,
                           std::string_view value_col, const ParseOptions& opts = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw data_error(path + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = detail::split_commas(line);
  auto find_col = [&](std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw data_error(path + ": no column named '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t di = find_col(date_col);
  const std::size_t vi = find_col(value_col);

  RawSeries out;
  out.name = std::string(value_col);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    const std::string where = path + ": row " + std::to_string(row);
    if (di >= cells.size()) throw data_error(where + ": missing date cell");
    const auto date = Date::parse(cells[di]);
    if (!date) throw data_error(where + ": unparseable date '" + std::string(cells[di]) + "'");
    if (vi >= cells.size() || cells[vi].empty()) {
      ++out.dropped_rows;
      continue;
    }
    const auto value = detail::parse_double(cells[vi]);
    if (!value)
      throw data_error(where + ": unparseable value '" + std::string(cells[vi]) + "'");
    out.points.push_back({*date, *value});
  }

  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const Observation& a, const Observation& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < out.points.size(); ++i)
    if (out.points[i].date == out.points[i - 1].date)
      throw data_error(path + ": duplicate date " + out.points[i].date.str());
  if (out.points.size() < opts.min_rows)
    throw data_error(path + ": only " + std::to_string(out.points.size()) +
                     " usable rows, need at least " + std::to_string(opts.min_rows));
  return out;
}

/// Keeps the last observation of every calendar month or ISO week.
inline RawSeries resample(const RawSeries& s, Frequency freq) {
  if (freq == Frequency::none) return s;
  auto key = [freq](const Date& d) {
    return freq == Frequency::monthly ? d.month_key() : d.iso_week_key();
  };
  RawSeries out;
  out.name = s.name;
  out.dropped_rows = s.dropped_rows;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const bool last_in_period =
        i + 1 == s.points.size() || key(s.points[i + 1].date) != key(s.points[i].date);
    if (last_in_period) out.points.push_back(s.points[i]);
  }
  return out;
}

/// Restricts to from <= date <= to; either bound may be absent.
inline RawSeries filter_range(const RawSeries& s, std::optional<Date> from,
                              std::optional<Date> to) {
  RawSeries out;
  out.name = s.name;
  out.dropped_rows = s.dropped_rows;
  for (const auto& p : s.points)
    if ((!from || p.date >= *from) && (!to || p.date <= *to)) out.points.push_back(p);
  return out;
}

/// Shifts and scales to zero mean and unit sample standard deviation (N-1).
inline void standardize(std::vector<double>& v, std::string_view label = "series") {
  if (v.size() < 2) throw data_error(std::string(label) + ": too short to standardize");
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : v) ss += (a - mean) * (a - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0) || !std::isfinite(sd))
    throw data_error(std::string(label) + ": zero variance, cannot standardize");
  for (double& a : v) a = (a - mean) / sd;
}

/// Intersects the two series on date, applies the transform pointwise and
/// optionally standardizes each side. Differencing transforms drop the first
/// common date.
inline AlignedPair align_and_transform(const RawSeries& a, const RawSeries& b,
                                       Transform transform, bool standardize_output) {
  std::vector<Observation> ca, cb;
  for (std::size_t i = 0, j = 0; i < a.points.size() && j < b.points.size();) {
    if (a.points[i].date < b.points[j].date) {
      ++i;
    } else if (b.points[j].date < a.points[i].date) {
      ++j;
    } else {
      ca.push_back(a.points[i++]);
      cb.push_back(b.points[j++]);
    }
  }
  if (ca.size() < 5)
    throw data_error("date intersection of '" + a.name + "' and '" + b.name + "' has " +
                     std::to_string(ca.size()) + " points, need at least 5");

  AlignedPair out;
  out.transform_applied = transform;
  auto apply = [&](const std::vector<Observation>& obs, const std::string& name,
                   std::vector<double>& dst) {
    if (transform == Transform::none) {
      for (const auto& o : obs) dst.push_back(o.value);
      return;
    }
    if (transform == Transform::log_return)
      for (const auto& o : obs)
        if (!(o.value > 0.0))
          throw data_error(name + ": nonpositive value " + std::to_string(o.value) + " at " +
                           o.date.str() + " under log-return transform");
    for (std::size_t i = 1; i < obs.size(); ++i)
      dst.push_back(transform == Transform::log_return
                        ? std::log(obs[i].value) - std::log(obs[i - 1].value)
                        : obs[i].value - obs[i - 1].value);
  };
  apply(ca, a.name, out.x);
  apply(cb, b.name, out.y);
  for (std::size_t i = transform == Transform::none ? 0 : 1; i < ca.size(); ++i)
    out.dates.push_back(ca[i].date.str());

  if (standardize_output) {
    standardize(out.x, a.name);
    standardize(out.y, b.name);
    out.standardized = true;
  }
  return out;
}

/// Wraps two in-memory series as a pair with synthetic index labels.
inline AlignedPair make_pair(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("make_pair: length mismatch");
  AlignedPair out;
  out.x = std::move(x);
  out.y = std::move(y);
  out.dates.reserve(out.x.size());
  for (std::size_t i = 0; i < out.x.size(); ++i) out.dates.push_back(std::to_string(i + 1));
  return out;
}

}  // namespace toplag
