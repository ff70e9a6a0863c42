#include "sitedev/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace sitedev::report {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string trend_csv(const analytics::TrendReport& report) {
  std::ostringstream out;
  out << "year,mean,ci_low,ci_high,n,slope,pct_per_year,pct_total\n";
  for (const auto& y : report.per_year)
    out << y.year << ',' << format_number(y.mean) << ',' << format_number(y.ci_low) << ','
        << format_number(y.ci_high) << ',' << y.n << ',' << format_number(report.fit.slope) << ','
        << format_number(report.pct_change_per_year) << ','
        << format_number(report.pct_change_total) << '\n';
  return out.str();
}

std::string site_change_csv(std::span<const SiteDelta> rows) {
  std::ostringstream out;
  out << "site_id,oldest,newest,observations,oldest_value,newest_value,delta\n";
  for (const auto& r : rows)
    out << csv_field(r.site_id) << ',' << r.oldest.to_string() << ',' << r.newest.to_string()
        << ',' << r.observations << ',' << format_number(r.oldest_value) << ','
        << format_number(r.newest_value) << ',' << format_number(r.delta) << '\n';
  return out.str();
}

std::string ap_csv(std::span<const ApTableRow> rows) {
  std::ostringstream out;
  out << "threshold,year,images,tp,fp,ap,flag\n";
  for (const auto& r : rows)
    out << format_number(r.threshold) << ',' << r.year << ',' << r.row.images << ','
        << r.row.counts.true_positives << ',' << r.row.counts.false_positives << ','
        << (r.row.ap ? format_number(*r.row.ap) : std::string()) << ',' << to_string(r.row.flag)
        << '\n';
  return out.str();
}

std::string trend_svg(const analytics::TrendReport& report, std::string_view title,
                      std::string_view y_label) {
  constexpr double kW = 640, kH = 400, kLeft = 80, kRight = 20, kTop = 40, kBottom = 50;
  const auto& rows = report.per_year;
  double x0 = rows.front().year, x1 = rows.back().year;
  if (x1 == x0) x1 = x0 + 1;
  double y0 = rows.front().ci_low, y1 = rows.front().ci_high;
  for (const auto& r : rows) {
    y0 = std::min({y0, r.ci_low, r.mean});
    y1 = std::max({y1, r.ci_high, r.mean});
  }
  if (y1 == y0) {
    y0 -= 1;
    y1 += 1;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };
  auto n = [](double v) { return format_number(std::round(v * 100.0) / 100.0); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n";

  // CI band: upper edge left to right, lower edge back.
  s << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
  for (const auto& r : rows) s << n(px(r.year)) << ',' << n(py(r.ci_high)) << ' ';
  for (auto it = rows.rbegin(); it != rows.rend(); ++it)
    s << n(px(it->year)) << ',' << n(py(it->ci_low)) << ' ';
  s << "\"/>\n";

  s << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\" points=\"";
  for (const auto& r : rows) s << n(px(r.year)) << ',' << n(py(r.mean)) << ' ';
  s << "\"/>\n";
  for (const auto& r : rows)
    s << "<circle cx=\"" << n(px(r.year)) << "\" cy=\"" << n(py(r.mean)) << "\" r=\"3\" fill=\"#08519c\"/>\n";

  s << "<line x1=\"" << n(px(x0)) << "\" y1=\"" << n(py(report.fit.predict(x0))) << "\" x2=\""
    << n(px(x1)) << "\" y2=\"" << n(py(report.fit.predict(x1)))
    << "\" stroke=\"#d94801\" stroke-dasharray=\"6 4\"/>\n";

  // Axes and tick labels.
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
    << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kH - kBottom << "\" stroke=\"black\"/>\n";
  for (const auto& r : rows)
    s << "<text x=\"" << n(px(r.year)) << "\" y=\"" << kH - kBottom + 18
      << "\" text-anchor=\"middle\">" << r.year << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = y0 + (y1 - y0) * i / 4.0;
    s << "<text x=\"" << kLeft - 6 << "\" y=\"" << n(py(v) + 4) << "\" text-anchor=\"end\">"
      << n(v) << "</text>\n";
  }
  s << "<text x=\"16\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 16 " << kH / 2
    << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace sitedev::report
