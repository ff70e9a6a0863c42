#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sitedev/analytics.hpp"
#include "sitedev/masks.hpp"

namespace sitedev::report {

/// Shortest round-trip decimal form; "nan"/"inf" for non-finite values.
std::string format_number(double v);

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(std::string_view text);

/// Columns: year,mean,ci_low,ci_high,n,slope,pct_per_year,pct_total
std::string trend_csv(const analytics::TrendReport& report);

struct SiteDelta {
  std::string site_id;
  Date oldest;
  Date newest;
  std::size_t observations = 0;
  double oldest_value = 0.0;
  double newest_value = 0.0;
  double delta = 0.0;
};

/// Columns: site_id,oldest,newest,observations,oldest_value,newest_value,delta
std::string site_change_csv(std::span<const SiteDelta> rows);

/// Columns: threshold,year,images,tp,fp,ap,flag  (year "all" for the pooled row)
struct ApTableRow {
  double threshold = 0.0;
  std::string year;
  ApRow row;
};
std::string ap_csv(std::span<const ApTableRow> rows);

/// Line chart of yearly means with a shaded CI band and the fitted line.
std::string trend_svg(const analytics::TrendReport& report, std::string_view title,
                      std::string_view y_label);

}  // namespace sitedev::report
