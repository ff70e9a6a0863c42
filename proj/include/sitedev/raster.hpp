#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sitedev/date.hpp"
#include "sitedev/geo.hpp"

namespace sitedev {

enum class BandKind { Panchromatic, Rgb, Radiance };

std::string_view to_string(BandKind kind);
BandKind parse_band_kind(std::string_view text);

/// Single-band grid of samples with its placement and acquisition metadata.
///
/// Imagery (Panchromatic, Rgb) samples are normalized to [0, 1] regardless of
/// source bit depth; Radiance samples are non-negative nW/(cm^2 sr).
/// Instances are immutable once constructed.
class RasterGrid {
 public:
  struct Meta {
    BandKind band_kind = BandKind::Panchromatic;
    int bit_depth = 32;
    Date acquired;
    std::optional<YearMonth> period;
    GeoTransform transform;

    bool operator==(const Meta&) const = default;
  };

  RasterGrid(std::size_t height, std::size_t width, std::vector<double> values,
             Meta meta);

  /// Constant-valued grid.
  static RasterGrid filled(std::size_t height, std::size_t width, double value,
                           Meta meta);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double at(std::size_t row, std::size_t col) const {
    return values_[row * width_ + col];
  }
  const Meta& meta() const { return meta_; }
  BandKind band_kind() const { return meta_.band_kind; }
  const GeoTransform& transform() const { return meta_.transform; }
  const Date& acquired() const { return meta_.acquired; }

  /// Ground extent in meters.
  double extent_x_m() const { return width_ * meta_.transform.pixel_size_x_m; }
  double extent_y_m() const { return height_ * meta_.transform.pixel_size_y_m; }

  /// Geographic center of the grid.
  void center(double& lon, double& lat) const;

  RasterGrid with_meta(Meta meta) const;

  bool operator==(const RasterGrid&) const = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> values_;
  Meta meta_;
};

/// Y = 0.299 R + 0.587 G + 0.114 B per pixel.
RasterGrid rgb_to_luminance(const RasterGrid& r, const RasterGrid& g,
                            const RasterGrid& b);

inline constexpr double kDefaultCropSideM = 800.0;

/// Sub-grid covering a side_m x side_m square centered at (lon, lat).
/// A pixel is included when its center lies in the half-open window
/// [left, right) x [top, bottom). Throws OutOfBounds when the window would need
/// pixels beyond the raster on any edge; the message reports overshoot per edge.
RasterGrid crop_window(const RasterGrid& r, double center_lon, double center_lat,
                       double side_m = kDefaultCropSideM);

/// Bilinear resampling with pixel-center alignment and edge clamping.
RasterGrid resample_bilinear(const RasterGrid& r, std::size_t out_h,
                             std::size_t out_w);

struct ResampleTarget {
  std::size_t height = 516;
  std::size_t width = 426;
};

// Canonical container: one JSON header line, then H*W little-endian float32.

RasterGrid load_raster(const std::filesystem::path& path);
RasterGrid decode_raster(std::span<const std::byte> bytes);
std::vector<std::byte> encode_raster(const RasterGrid& grid);
void save_raster(const RasterGrid& grid, const std::filesystem::path& path);

// Importers. Image files carry no placement, so the caller supplies it.

struct ImportedImage {
  std::vector<RasterGrid> channels;  // 1 (gray) or 3 (R, G, B)
};

ImportedImage import_pgm(const std::filesystem::path& path,
                         const RasterGrid::Meta& meta);
ImportedImage import_ppm(const std::filesystem::path& path,
                         const RasterGrid::Meta& meta);
ImportedImage import_png(const std::filesystem::path& path,
                         const RasterGrid::Meta& meta);
/// Dispatches on extension (.ras, .pgm, .ppm, .png).
ImportedImage import_image(const std::filesystem::path& path,
                           const RasterGrid::Meta& meta);

}  // namespace sitedev
