#include "sitedev/ntl.hpp"

#include <algorithm>
#include <cmath>

#include "sitedev/error.hpp"

namespace sitedev::ntl {

NtlGrid::NtlGrid(RasterGrid grid) : grid_(std::move(grid)) {
  if (grid_.band_kind() != BandKind::Radiance)
    throw Error(ErrorKind::Validation, "NTL grid must have band_kind radiance");
  if (!grid_.meta().period)
    throw Error(ErrorKind::Validation, "NTL grid is missing its period tag");
  if (*grid_.meta().period < kFirstPeriod)
    throw Error(ErrorKind::Validation,
                "NTL period " + grid_.meta().period->to_string() + " predates 2012-04");
  for (double v : grid_.values())
    if (v < 0.0) throw Error(ErrorKind::Validation, "NTL radiance must be non-negative");
}

bool eligible(const Date& acquired) { return acquired >= kFirstEligibleDate; }

std::vector<CellOverlap> overlapping_cells(const NtlGrid& g, const Footprint& f) {
  if (!(f.side_m > 0.0)) throw Error(ErrorKind::OutOfRange, "footprint side must be positive");
  const RasterGrid& grid = g.grid();
  const GeoTransform& t = grid.transform();
  const auto c = t.to_local(f.center_lon, f.center_lat);
  const double half = f.side_m / 2.0;
  const double left = c.east_m - half, right = c.east_m + half;
  const double top = c.south_m - half, bottom = c.south_m + half;
  const double cw = t.pixel_size_x_m, ch = t.pixel_size_y_m;

  auto clamp_index = [](double v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n)));
  };
  const std::size_t c0 = clamp_index(std::floor(left / cw), grid.width());
  const std::size_t c1 = clamp_index(std::ceil(right / cw), grid.width());
  const std::size_t r0 = clamp_index(std::floor(top / ch), grid.height());
  const std::size_t r1 = clamp_index(std::ceil(bottom / ch), grid.height());

  // Exact half-cell overlaps pass through a degree round trip; allow for it.
  constexpr double kSlack = 1e-9;
  std::vector<CellOverlap> out;
  for (std::size_t r = r0; r < r1; ++r) {
    const double oy = std::min(bottom, (r + 1) * ch) - std::max(top, r * ch);
    if (oy <= 0.0) continue;
    for (std::size_t col = c0; col < c1; ++col) {
      const double ox = std::min(right, (col + 1) * cw) - std::max(left, col * cw);
      if (ox <= 0.0) continue;
      const double fraction = std::min(1.0, (ox * oy) / (cw * ch));
      if (fraction >= kMinOverlapFraction - kSlack)
        out.push_back({r * grid.width() + col, fraction});
    }
  }
  return out;
}

NtlLabel ntl_label(const NtlGrid& g, const Footprint& f) {
  const auto cells = overlapping_cells(g, f);
  if (cells.empty())
    throw Error(ErrorKind::NoLabel, "no NTL cell overlaps the footprint by at least half");
  const auto v = g.grid().values();
  NtlLabel best{v[cells.front().cell], cells.front().cell};
  for (const auto& c : cells)
    if (v[c.cell] > best.radiance) best = {v[c.cell], c.cell};
  return best;
}

}  // namespace sitedev::ntl
