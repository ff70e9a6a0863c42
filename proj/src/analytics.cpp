#include "sitedev/analytics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <string>

#include "sitedev/error.hpp"

namespace sitedev::analytics {

LinearFit ols_fit(std::span<const Point> points) {
  const std::size_t n = points.size();
  if (n < 2) throw Error(ErrorKind::Degenerate, "a linear fit needs at least two points");
  for (const Point& p : points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw Error(ErrorKind::OutOfRange, "fit points must be finite");

  const bool x_constant = std::all_of(points.begin(), points.end(),
                                      [&](const Point& p) { return p.x == points[0].x; });
  if (x_constant) throw Error(ErrorKind::Degenerate, "all x values are identical");

  double mx = 0.0, my = 0.0;
  for (const Point& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;

  const bool y_constant = std::all_of(points.begin(), points.end(),
                                      [&](const Point& p) { return p.y == points[0].y; });
  if (y_constant) return {0.0, points[0].y, 1.0, n};

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const Point& p : points) {
    const double dx = p.x - mx, dy = p.y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LinearFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;

  double ss_res = 0.0;
  for (const Point& p : points) {
    const double r = p.y - fit.predict(p.x);
    ss_res += r * r;
  }
  fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

double l1_score(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size())
    throw Error(ErrorKind::Dimension, "prediction and label counts differ: " +
                                          std::to_string(predictions.size()) + " vs " +
                                          std::to_string(labels.size()));
  if (predictions.empty()) throw Error(ErrorKind::Degenerate, "L1 score of an empty set");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) total += std::abs(predictions[i] - labels[i]);
  return total / static_cast<double>(labels.size());
}

Summary dataset_summary(std::span<const double> values, SdConvention convention) {
  if (values.empty()) throw Error(ErrorKind::Degenerate, "summary of an empty set");
  // Welford's running update.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double delta = v - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (v - mean);
  }
  double denom = static_cast<double>(k);
  if (convention == SdConvention::Sample) {
    if (k < 2) throw Error(ErrorKind::Degenerate, "sample standard deviation needs two values");
    denom -= 1.0;
  }
  return {mean, std::sqrt(std::max(0.0, m2) / denom), k};
}

YearStats mean_with_ci(int year, std::span<const double> values, double level) {
  if (values.empty()) throw Error(ErrorKind::Degenerate, "confidence interval of an empty group");
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorKind::OutOfRange, "confidence level must lie in (0, 1)");
  YearStats s;
  s.year = year;
  s.n = values.size();
  if (s.n == 1) {
    s.mean = s.ci_low = s.ci_high = values[0];
    return s;
  }
  const Summary sum = dataset_summary(values, SdConvention::Sample);
  s.mean = sum.mean;
  const boost::math::students_t dist(static_cast<double>(s.n - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0));
  const double half = t * sum.sd / std::sqrt(static_cast<double>(s.n));
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

TrendReport yearly_trend(std::span<const YearValue> observations, double level) {
  std::map<int, std::vector<double>> groups;
  for (const YearValue& o : observations) groups[o.year].push_back(o.value);
  if (groups.size() < 2)
    throw Error(ErrorKind::Degenerate, "a trend needs observations from at least two years");

  TrendReport report;
  for (const auto& [year, values] : groups) report.per_year.push_back(mean_with_ci(year, values, level));

  std::vector<Point> points;
  points.reserve(observations.size());
  for (const YearValue& o : observations) points.push_back({static_cast<double>(o.year), o.value});
  report.fit = ols_fit(points);

  const int first = groups.begin()->first, last = groups.rbegin()->first;
  if (report.fit.slope == 0.0) {
    report.pct_change_per_year = 0.0;
  } else {
    const double base = report.fit.predict(first);
    if (base == 0.0)
      throw Error(ErrorKind::Degenerate, "fitted first-year value is zero; percent change undefined");
    report.pct_change_per_year = 100.0 * report.fit.slope / base;
  }
  report.pct_change_total = report.pct_change_per_year * static_cast<double>(last - first);
  return report;
}

double site_change(std::span<const DatedValue> series) {
  if (series.size() < 2)
    throw Error(ErrorKind::Degenerate, "site change needs at least two observations");
  std::vector<DatedValue> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const DatedValue& a, const DatedValue& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].date == sorted[i - 1].date)
      throw Error(ErrorKind::Validation,
                  "duplicate observation date " + sorted[i].date.to_string());
  return sorted.back().value - sorted.front().value;
}

}  // namespace sitedev::analytics
