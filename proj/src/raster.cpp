#include "sitedev/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <string>

#include "sitedev/error.hpp"

namespace sitedev {

std::string_view to_string(BandKind kind) {
  switch (kind) {
    case BandKind::Panchromatic: return "panchromatic";
    case BandKind::Rgb: return "rgb";
    case BandKind::Radiance: return "radiance";
  }
  return "panchromatic";
}

BandKind parse_band_kind(std::string_view text) {
  if (text == "panchromatic") return BandKind::Panchromatic;
  if (text == "rgb") return BandKind::Rgb;
  if (text == "radiance") return BandKind::Radiance;
  throw Error(ErrorKind::Load, "unknown band_kind '" + std::string(text) + "'");
}

RasterGrid::RasterGrid(std::size_t height, std::size_t width, std::vector<double> values,
                       Meta meta)
    : height_(height), width_(width), values_(std::move(values)), meta_(std::move(meta)) {
  if (height_ == 0 || width_ == 0)
    throw Error(ErrorKind::Dimension, "raster dimensions must be at least 1x1");
  if (values_.size() != height_ * width_)
    throw Error(ErrorKind::Dimension, "raster has " + std::to_string(values_.size()) +
                                          " samples, expected " +
                                          std::to_string(height_ * width_));
  meta_.transform.validate();
  if (!meta_.acquired.valid()) throw Error(ErrorKind::OutOfRange, "invalid acquisition date");
  if (meta_.bit_depth != 8 && meta_.bit_depth != 16 && meta_.bit_depth != 32)
    throw Error(ErrorKind::OutOfRange, "bit_depth must be 8, 16 or 32");
  const bool imagery = meta_.band_kind != BandKind::Radiance;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v))
      throw Error(ErrorKind::OutOfRange, "sample " + std::to_string(i) + " is not finite");
    if (imagery && (v < 0.0 || v > 1.0))
      throw Error(ErrorKind::OutOfRange,
                  "imagery sample " + std::to_string(i) + " outside [0, 1]");
  }
}

RasterGrid RasterGrid::filled(std::size_t height, std::size_t width, double value, Meta meta) {
  return RasterGrid(height, width, std::vector<double>(height * width, value), std::move(meta));
}

void RasterGrid::center(double& lon, double& lat) const {
  meta_.transform.to_geographic(extent_x_m() / 2.0, extent_y_m() / 2.0, lon, lat);
}

RasterGrid RasterGrid::with_meta(Meta meta) const {
  return RasterGrid(height_, width_, values_, std::move(meta));
}

RasterGrid rgb_to_luminance(const RasterGrid& r, const RasterGrid& g, const RasterGrid& b) {
  if (r.height() != g.height() || r.height() != b.height() || r.width() != g.width() ||
      r.width() != b.width())
    throw Error(ErrorKind::Dimension, "RGB channels differ in dimensions");
  if (!(r.transform() == g.transform()) || !(r.transform() == b.transform()))
    throw Error(ErrorKind::Dimension, "RGB channels are not co-registered");
  for (const RasterGrid* c : {&r, &g, &b})
    if (c->band_kind() == BandKind::Radiance)
      throw Error(ErrorKind::OutOfRange, "luminance conversion needs imagery channels in [0, 1]");

  std::vector<double> y(r.size());
  const auto rv = r.values(), gv = g.values(), bv = b.values();
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = std::min(1.0, 0.299 * rv[i] + 0.587 * gv[i] + 0.114 * bv[i]);

  RasterGrid::Meta meta = r.meta();
  meta.band_kind = BandKind::Panchromatic;
  return RasterGrid(r.height(), r.width(), std::move(y), std::move(meta));
}

RasterGrid crop_window(const RasterGrid& r, double center_lon, double center_lat,
                       double side_m) {
  if (!std::isfinite(side_m) || side_m <= 0.0)
    throw Error(ErrorKind::OutOfRange, "crop side must be positive");
  const GeoTransform& t = r.transform();
  const auto c = t.to_local(center_lon, center_lat);
  const double half = side_m / 2.0;
  const double left = c.east_m - half, right = c.east_m + half;
  const double top = c.south_m - half, bottom = c.south_m + half;

  // Pixel i is inside iff lo <= (i + 0.5) * size < hi.
  auto first = [](double lo, double size) { return static_cast<long>(std::ceil(lo / size - 0.5)); };
  const long col0 = first(left, t.pixel_size_x_m), col1 = first(right, t.pixel_size_x_m);
  const long row0 = first(top, t.pixel_size_y_m), row1 = first(bottom, t.pixel_size_y_m);
  const long w = static_cast<long>(r.width()), h = static_cast<long>(r.height());

  if (col0 < 0 || row0 < 0 || col1 > w || row1 > h) {
    std::ostringstream msg;
    msg << "crop window exceeds raster extent; overshoot (m): left "
        << std::max(0.0, -left) << ", right " << std::max(0.0, right - r.extent_x_m())
        << ", top " << std::max(0.0, -top) << ", bottom "
        << std::max(0.0, bottom - r.extent_y_m());
    throw Error(ErrorKind::OutOfBounds, msg.str());
  }
  if (col1 <= col0 || row1 <= row0)
    throw Error(ErrorKind::OutOfRange, "crop window contains no pixel centers");

  const auto out_w = static_cast<std::size_t>(col1 - col0);
  const auto out_h = static_cast<std::size_t>(row1 - row0);
  std::vector<double> out(out_h * out_w);
  for (std::size_t i = 0; i < out_h; ++i) {
    const auto src = r.values().subspan((row0 + i) * r.width() + col0, out_w);
    std::copy(src.begin(), src.end(), out.begin() + i * out_w);
  }
  RasterGrid::Meta meta = r.meta();
  meta.transform = t.shifted(row0, col0);
  return RasterGrid(out_h, out_w, std::move(out), std::move(meta));
}

RasterGrid resample_bilinear(const RasterGrid& r, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0)
    throw Error(ErrorKind::Dimension, "resample target must be at least 1x1");
  const std::size_t h = r.height(), w = r.width();
  const double sy = static_cast<double>(h) / out_h;
  const double sx = static_cast<double>(w) / out_w;

  struct Tap {
    std::size_t i0, i1;
    double frac;
  };
  auto taps = [](std::size_t n_out, std::size_t n_in, double scale) {
    std::vector<Tap> out(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
      double pos = (i + 0.5) * scale - 0.5;
      pos = std::clamp(pos, 0.0, static_cast<double>(n_in - 1));
      const auto i0 = static_cast<std::size_t>(std::floor(pos));
      const std::size_t i1 = std::min(i0 + 1, n_in - 1);
      out[i] = {i0, i1, pos - static_cast<double>(i0)};
    }
    return out;
  };
  const auto ty = taps(out_h, h, sy);
  const auto tx = taps(out_w, w, sx);

  const auto v = r.values();
  std::vector<double> out(out_h * out_w);
  for (std::size_t i = 0; i < out_h; ++i) {
    const Tap& a = ty[i];
    for (std::size_t j = 0; j < out_w; ++j) {
      const Tap& b = tx[j];
      const double top = v[a.i0 * w + b.i0] * (1.0 - b.frac) + v[a.i0 * w + b.i1] * b.frac;
      const double bot = v[a.i1 * w + b.i0] * (1.0 - b.frac) + v[a.i1 * w + b.i1] * b.frac;
      out[i * out_w + j] = top * (1.0 - a.frac) + bot * a.frac;
    }
  }
  // Convex combinations can still drift by an ulp past the input range.
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  for (double& x : out) x = std::clamp(x, *lo, *hi);

  RasterGrid::Meta meta = r.meta();
  meta.transform.pixel_size_x_m *= sx;
  meta.transform.pixel_size_y_m *= sy;
  return RasterGrid(out_h, out_w, std::move(out), std::move(meta));
}

}  // namespace sitedev
