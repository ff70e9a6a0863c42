#include "sitedev/date.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "sitedev/error.hpp"

namespace sitedev {

namespace {

int parse_field(std::string_view text, std::string_view whole, const char* what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw Error(ErrorKind::Load,
                "invalid " + std::string(what) + " in '" + std::string(whole) + "'");
  return v;
}

}  // namespace

Date Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
    throw Error(ErrorKind::Load, "date must be YYYY-MM-DD, got '" + std::string(iso) + "'");
  Date d{parse_field(iso.substr(0, 4), iso, "year"),
         parse_field(iso.substr(5, 2), iso, "month"),
         parse_field(iso.substr(8, 2), iso, "day")};
  if (!d.valid()) throw Error(ErrorKind::Load, "no such calendar date '" + std::string(iso) + "'");
  return d;
}

bool Date::valid() const {
  using namespace std::chrono;
  return year_month_day{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                        std::chrono::day{static_cast<unsigned>(day)}}
      .ok();
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

YearMonth YearMonth::parse(std::string_view text) {
  if (text.size() != 7 || text[4] != '-')
    throw Error(ErrorKind::Load, "period must be YYYY-MM, got '" + std::string(text) + "'");
  YearMonth ym{parse_field(text.substr(0, 4), text, "year"),
               parse_field(text.substr(5, 2), text, "month")};
  if (ym.month < 1 || ym.month > 12)
    throw Error(ErrorKind::Load, "invalid month in '" + std::string(text) + "'");
  return ym;
}

std::string YearMonth::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

}  // namespace sitedev
