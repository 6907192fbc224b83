#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace saber {

/// Calendar date with day resolution. Ordered, hashable by serial day.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  constexpr Date(int y, unsigned m, unsigned d)
      : days_(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}}) {}

  /// Parses strict `YYYY-MM-DD`; nullopt on any deviation or invalid day.
  static std::optional<Date> parse(std::string_view text);

  std::string iso() const;

  constexpr std::chrono::sys_days days() const { return days_; }
  constexpr std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
  constexpr int year() const { return static_cast<int>(ymd().year()); }
  constexpr unsigned month() const { return static_cast<unsigned>(ymd().month()); }
  constexpr unsigned day() const { return static_cast<unsigned>(ymd().day()); }
  constexpr long serial() const { return days_.time_since_epoch().count(); }

  /// Adds calendar years; Feb 29 clamps to Feb 28 in non-leap targets.
  Date plus_years(int years) const;
  constexpr Date plus_days(int n) const { return Date{days_ + std::chrono::days{n}}; }

  friend constexpr auto operator<=>(const Date&, const Date&) = default;
  friend constexpr bool operator==(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

/// Parses or throws Error(kind) naming the offending text.
Date parse_date_or_throw(std::string_view text, std::string_view context);

}  // namespace saber
