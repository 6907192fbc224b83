#include "saber/date.hpp"

#include <charconv>
#include <cstdio>

#include "saber/error.hpp"

namespace saber {

namespace {

bool parse_digits(std::string_view s, int& out) {
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
      !parse_digits(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{std::chrono::sys_days{ymd}};
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

Date Date::plus_years(int years) const {
  auto ymd = this->ymd();
  std::chrono::year_month_day shifted{ymd.year() + std::chrono::years{years}, ymd.month(), ymd.day()};
  if (!shifted.ok()) {
    shifted = std::chrono::year_month_day{std::chrono::year_month_day_last{
        shifted.year(), std::chrono::month_day_last{shifted.month()}}};
  }
  return Date{std::chrono::sys_days{shifted}};
}

Date parse_date_or_throw(std::string_view text, std::string_view context) {
  if (auto d = Date::parse(text)) return *d;
  throw Error(ErrorKind::DataError,
              std::string(context) + ": invalid date '" + std::string(text) + "'");
}

}  // namespace saber
