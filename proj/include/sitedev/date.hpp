#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace sitedev {

/// Calendar date (proleptic Gregorian). Parsed from and printed as YYYY-MM-DD.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  static Date parse(std::string_view iso);
  std::string to_string() const;
  bool valid() const;

  auto operator<=>(const Date&) const = default;
};

/// Year-month period tag of a monthly composite, printed as YYYY-MM.
struct YearMonth {
  int year = 1970;
  int month = 1;

  static YearMonth parse(std::string_view text);
  std::string to_string() const;

  auto operator<=>(const YearMonth&) const = default;
};

}  // namespace sitedev
