#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace toplag {

/// Calendar day. Thin wrapper over std::chrono::year_month_day with ISO-8601
/// text conversion and the period keys used for resampling.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::year_month_day ymd) : ymd_(ymd) {}
  Date(int y, unsigned m, unsigned d)
      : ymd_(std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}) {}

  /// Parses strict YYYY-MM-DD. Returns nullopt on any deviation or an
  /// impossible calendar day.
  static std::optional<Date> parse(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
        !parse_int(s.substr(8, 2), d))
      return std::nullopt;
    Date out(y, m, d);
    if (!out.ymd_.ok()) return std::nullopt;
    return out;
  }

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
    return buf;
  }

  int year() const { return static_cast<int>(ymd_.year()); }
  unsigned month() const { return static_cast<unsigned>(ymd_.month()); }
  unsigned day() const { return static_cast<unsigned>(ymd_.day()); }

  std::chrono::sys_days days() const { return std::chrono::sys_days{ymd_}; }

  Date plus_days(int n) const {
    return Date{std::chrono::year_month_day{days() + std::chrono::days{n}}};
  }

  /// ISO-8601 week as year*100 + week. Weeks start on Monday and week 1
  /// contains the year's first Thursday.
  int iso_week_key() const {
    using namespace std::chrono;
    const sys_days sd = days();
    const unsigned wd = weekday{sd}.iso_encoding();  // Mon=1..Sun=7
    const sys_days thursday = sd + days_t(4 - static_cast<int>(wd));
    const year_month_day thu{thursday};
    const sys_days jan1 = sys_days{thu.year() / January / 1};
    const int week = static_cast<int>((thursday - jan1).count() / 7) + 1;
    return static_cast<int>(thu.year()) * 100 + week;
  }

  int month_key() const { return year() * 100 + static_cast<int>(month()); }

  friend bool operator==(const Date& a, const Date& b) { return a.ymd_ == b.ymd_; }
  friend std::strong_ordering operator<=>(const Date& a, const Date& b) {
    return a.days() <=> b.days();
  }

 private:
  using days_t = std::chrono::days;

  template <typename Int>
  static bool parse_int(std::string_view s, Int& out) {
    for (char c : s)
      if (c < '0' || c > '9') return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
  }

  std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::January,
                                   std::chrono::day{1}};
};

}  // namespace toplag
