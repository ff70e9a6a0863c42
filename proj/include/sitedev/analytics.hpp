#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sitedev/date.hpp"

namespace sitedev::analytics {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;

  double predict(double x) const { return slope * x + intercept; }
};

/// Ordinary least squares y = slope*x + intercept.
/// R^2 = 1 - SS_res/SS_tot; for constant y it is 1 when residuals vanish, else 0.
/// Throws Degenerate when fewer than two points or all x coincide.
LinearFit ols_fit(std::span<const Point> points);

/// A = m * NTL + b0.
inline double predict_area_from_ntl(const LinearFit& fit, double ntl) {
  return fit.predict(ntl);
}

/// Mean absolute error.
double l1_score(std::span<const double> predictions, std::span<const double> labels);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

enum class SdConvention { Population, Sample };

Summary dataset_summary(std::span<const double> values,
                        SdConvention convention = SdConvention::Population);

struct YearStats {
  int year = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

/// Student-t interval for the mean of `values`. A single value yields a
/// zero-width interval.
YearStats mean_with_ci(int year, std::span<const double> values, double level = 0.95);

struct TrendReport {
  std::vector<YearStats> per_year;
  LinearFit fit;
  double pct_change_per_year = 0.0;
  double pct_change_total = 0.0;
};

struct YearValue {
  int year = 0;
  double value = 0.0;
};

/// Per-year means with CIs, an OLS fit over the raw (year, value) pairs and
/// linear percent changes relative to the fitted first-year value.
/// Throws Degenerate with fewer than two distinct years.
TrendReport yearly_trend(std::span<const YearValue> observations, double level = 0.95);

struct DatedValue {
  Date date;
  double value = 0.0;
};

/// value(newest) - value(oldest). Throws with fewer than two observations or
/// duplicate dates.
double site_change(std::span<const DatedValue> series);

}  // namespace sitedev::analytics
