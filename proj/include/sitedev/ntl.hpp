#pragma once

#include <cstddef>
#include <vector>

#include "sitedev/date.hpp"
#include "sitedev/raster.hpp"

namespace sitedev::ntl {

/// First month of usable composites.
inline constexpr Date kFirstEligibleDate{2012, 4, 1};
inline constexpr YearMonth kFirstPeriod{2012, 4};

/// Monthly radiance composite in nW/(cm^2 sr).
class NtlGrid {
 public:
  /// Requires band_kind Radiance, a period tag >= 2012-04 and non-negative
  /// finite samples.
  explicit NtlGrid(RasterGrid grid);

  const RasterGrid& grid() const { return grid_; }
  const YearMonth& period() const { return *grid_.meta().period; }
  double cell_size_x_m() const { return grid_.transform().pixel_size_x_m; }
  double cell_size_y_m() const { return grid_.transform().pixel_size_y_m; }

 private:
  RasterGrid grid_;
};

struct Footprint {
  double center_lon = 0.0;
  double center_lat = 0.0;
  double side_m = kDefaultCropSideM;
};

bool eligible(const Date& acquired);

struct CellOverlap {
  std::size_t cell = 0;  // row-major index
  double fraction = 0.0;  // overlap area / cell area
};

inline constexpr double kMinOverlapFraction = 0.5;

/// Cells whose area overlap with the footprint square is at least half the
/// cell area, in row-major order. Empty when nothing qualifies.
std::vector<CellOverlap> overlapping_cells(const NtlGrid& g, const Footprint& f);

struct NtlLabel {
  double radiance = 0.0;
  std::size_t cell = 0;  // argmax, lowest index on ties
};

/// Maximum radiance over qualifying cells. Throws NoLabel when none qualify.
NtlLabel ntl_label(const NtlGrid& g, const Footprint& f);

}  // namespace sitedev::ntl
