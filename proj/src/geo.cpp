#include "sitedev/geo.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sitedev/error.hpp"

namespace sitedev {

std::string_view to_string(CrsTag tag) {
  return tag == CrsTag::LocalMeters ? "local_meters" : "wgs84_approx";
}

CrsTag parse_crs_tag(std::string_view text) {
  if (text == "local_meters") return CrsTag::LocalMeters;
  if (text == "wgs84_approx") return CrsTag::Wgs84Approx;
  throw Error(ErrorKind::Load, "unknown crs tag '" + std::string(text) + "'");
}

void GeoTransform::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(pixel_size_x_m) || !positive(pixel_size_y_m))
    throw Error(ErrorKind::OutOfRange, "pixel sizes must be finite and positive");
  if (!std::isfinite(origin_lon) || !std::isfinite(origin_lat) || !std::isfinite(anchor_lat))
    throw Error(ErrorKind::OutOfRange, "transform coordinates must be finite");
  if (std::abs(reference_lat()) >= 90.0)
    throw Error(ErrorKind::OutOfRange, "reference latitude must lie strictly inside (-90, 90)");
}

double GeoTransform::reference_lat() const {
  return crs == CrsTag::LocalMeters ? anchor_lat : origin_lat;
}

double GeoTransform::meters_per_degree_lon() const {
  return kMetersPerDegree * std::cos(reference_lat() * std::numbers::pi / 180.0);
}

GeoTransform::Offset GeoTransform::to_local(double lon, double lat) const {
  return {(lon - origin_lon) * meters_per_degree_lon(), (origin_lat - lat) * kMetersPerDegree};
}

void GeoTransform::to_geographic(double east_m, double south_m, double& lon,
                                 double& lat) const {
  lon = origin_lon + east_m / meters_per_degree_lon();
  lat = origin_lat - south_m / kMetersPerDegree;
}

GeoTransform GeoTransform::shifted(long row, long col) const {
  GeoTransform out = *this;
  if (row == 0 && col == 0) return out;
  to_geographic(col * pixel_size_x_m, row * pixel_size_y_m, out.origin_lon, out.origin_lat);
  // A Wgs84Approx grid references its own origin latitude; pin the old one so
  // the sub-grid keeps the parent's metric.
  if (crs == CrsTag::Wgs84Approx) {
    out.crs = CrsTag::LocalMeters;
    out.anchor_lat = origin_lat;
  }
  return out;
}

}  // namespace sitedev
