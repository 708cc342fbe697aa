#pragma once

#include <chrono>
#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace openindex {

// Calendar date without time of day, rendered as ISO-8601 YYYY-MM-DD.
class Date {
 public:
  constexpr Date() = default;
  Date(int year, unsigned month, unsigned day);

  static Date parse(std::string_view iso);
  static Date today_utc();

  int year() const noexcept { return year_; }
  unsigned month() const noexcept { return month_; }
  unsigned day() const noexcept { return day_; }

  std::string iso() const;

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  int year_ = 1970;
  unsigned month_ = 1;
  unsigned day_ = 1;
};

// Source of "today" for stamping records; injectable for reproducible runs.
using Clock = std::function<Date()>;

// Honors OPENINDEX_TODAY (YYYY-MM-DD) when set, otherwise the UTC date.
Clock default_clock();

}  // namespace openindex
