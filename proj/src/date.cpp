#include "openindex/date.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "openindex/errors.hpp"

namespace openindex {

namespace {

template <typename T>
T parse_number(std::string_view text, std::string_view whole) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("invalid date '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) : year_(year), month_(month), day_(day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok()) {
    throw ValidationError("invalid calendar date " + std::to_string(year) + "-" +
                          std::to_string(month) + "-" + std::to_string(day));
  }
}

Date Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw ValidationError("date must be YYYY-MM-DD, got '" + std::string(iso) + "'");
  }
  return Date(parse_number<int>(iso.substr(0, 4), iso), parse_number<unsigned>(iso.substr(5, 2), iso),
              parse_number<unsigned>(iso.substr(8, 2), iso));
}

Date Date::today_utc() {
  auto days = std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now());
  std::chrono::year_month_day ymd{days};
  return Date(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
              static_cast<unsigned>(ymd.day()));
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year_, month_, day_);
  return buf;
}

Clock default_clock() {
  if (const char* pinned = std::getenv("OPENINDEX_TODAY"); pinned != nullptr && *pinned != '\0') {
    Date fixed = Date::parse(pinned);
    return [fixed] { return fixed; };
  }
  return [] { return Date::today_utc(); };
}

}  // namespace openindex
