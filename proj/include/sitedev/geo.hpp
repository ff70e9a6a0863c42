#pragma once

#include <string_view>

namespace sitedev {

enum class CrsTag { LocalMeters, Wgs84Approx };

std::string_view to_string(CrsTag tag);
CrsTag parse_crs_tag(std::string_view text);

/// Meters per degree of latitude under the local equirectangular model.
inline constexpr double kMetersPerDegree = 111319.49079327357;  // 2*pi*6378137/360

/// Placement of a north-up grid. The origin is the outer corner of the
/// top-left pixel. Rows advance south, columns advance east.
///
/// Degree/meter conversion uses an equirectangular approximation around a
/// reference latitude: `anchor_lat` for LocalMeters grids, `origin_lat` for
/// Wgs84Approx grids.
struct GeoTransform {
  double origin_lon = 0.0;
  double origin_lat = 0.0;
  double pixel_size_x_m = 1.0;
  double pixel_size_y_m = 1.0;
  CrsTag crs = CrsTag::LocalMeters;
  double anchor_lat = 0.0;

  void validate() const;

  double reference_lat() const;
  double meters_per_degree_lon() const;

  /// Offset (meters east, meters south) of a geographic point from the origin.
  struct Offset {
    double east_m;
    double south_m;
  };
  Offset to_local(double lon, double lat) const;
  void to_geographic(double east_m, double south_m, double& lon, double& lat) const;

  /// Transform for the sub-grid whose top-left pixel is (row, col).
  GeoTransform shifted(long row, long col) const;

  bool operator==(const GeoTransform&) const = default;
};

}  // namespace sitedev
