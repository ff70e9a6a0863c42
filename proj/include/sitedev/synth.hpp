#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sitedev/dataset.hpp"
#include "sitedev/masks.hpp"
#include "sitedev/raster.hpp"

namespace sitedev::synth {

struct SceneSpec {
  std::size_t grid_h = 200;
  std::size_t grid_w = 200;
  double pixel_size_m = 4.0;
  std::size_t min_structures = 1;
  std::size_t max_structures = 6;
  double min_rect_m = 20.0;
  double max_rect_m = 120.0;
  double background = 0.25;
  double structure_level = 0.75;
  double noise_sd = 0.03;
  std::uint64_t seed = 1;
  /// Place rectangle edges at arbitrary sub-pixel positions instead of on
  /// pixel boundaries.
  bool subpixel = false;
  /// Minimum empty pixels between rectangles.
  std::size_t gap_px = 1;
  double center_lon = 116.4;
  double center_lat = 39.9;
  Date acquired{2020, 6, 15};

  void validate() const;
  double extent_m2() const;
};

/// Axis-aligned rectangle in pixel units: rows [row0, row0 + height),
/// cols [col0, col0 + width).
struct Rect {
  double row0 = 0.0;
  double col0 = 0.0;
  double height = 0.0;
  double width = 0.0;
};

struct Scene {
  RasterGrid raster;
  MaskSet masks;
  std::vector<Rect> rects;
  /// Geometric area of the rectangles before rasterization.
  double exact_area_m2 = 0.0;
  /// Summed rectangle perimeters in pixels.
  double perimeter_px = 0.0;
};

/// Non-overlapping rectangles rendered at the structure level over the
/// background plus clamped Gaussian noise. Masks are the exact pixel-center
/// rasterization of the geometry. Throws Unattainable when placement fails
/// after bounded retries.
Scene generate_scene(const SceneSpec& spec);

/// Scene whose rectangles sum to exactly `total_area_m2` of geometric area.
Scene generate_scene_with_area(const SceneSpec& spec, double total_area_m2);

struct PerturbResult {
  MaskSet predictions;
  std::vector<double> achieved_iou;
};

inline constexpr double kPerturbTolerance = 0.05;

/// Translates and dilates/erodes each truth mask so its IoU with the original
/// lands within ±0.05 of the target. Throws Unattainable when no candidate
/// reaches the band (typical for 1-pixel masks).
PerturbResult perturb_masks(const MaskSet& truths, double target_iou, std::uint64_t seed);
PerturbResult perturb_masks(const MaskSet& truths, std::span<const double> target_ious,
                            std::uint64_t seed);

struct GrowthSpec {
  std::vector<int> years{2018, 2019, 2020, 2021};
  double base_area_m2 = 40000.0;
  double growth_m2_per_year = 0.0;
  double jitter_sd_m2 = 0.0;
  std::uint64_t seed = 1;
};

struct YearScene {
  int year = 0;
  double target_area_m2 = 0.0;
  double jitter_m2 = 0.0;
  Scene scene;
};

struct GrowthSeries {
  std::vector<YearScene> scenes;
  double injected_slope_m2_per_year = 0.0;
};

/// Per-year scenes with exact areas base + growth*(year - first) + jitter.
/// Throws Unattainable when an area leaves [0, extent].
GrowthSeries growth_series(const GrowthSpec& growth, const SceneSpec& scene);

// ---------------------------------------------------------------------------
// Whole synthetic catalogs

struct FleetSpec {
  std::size_t sites = 50;
  std::vector<int> years{2018, 2019, 2020, 2021};
  double base_area_min_m2 = 20000.0;
  double base_area_max_m2 = 80000.0;
  double mean_growth_m2_per_year = 1000.0;
  double growth_sd_m2_per_year = 500.0;
  double jitter_sd_m2 = 500.0;
  /// Radiance = ntl_gain * area + N(0, ntl_noise_sd), clamped at 0.
  double ntl_gain = 2.7e-4;
  double ntl_noise_sd = 3.0;
  double ntl_cell_m = 500.0;
  /// Fraction of prediction instances perturbed to a high IoU target (0.8);
  /// the rest get 0.25.
  double good_prediction_rate = 0.6;
  std::uint64_t seed = 1;
  SceneSpec scene{.grid_h = 128, .grid_w = 128, .pixel_size_m = 6.25,
                  .min_rect_m = 25.0, .max_rect_m = 200.0, .subpixel = true};
};

struct SiteTruth {
  std::string site_id;
  double growth_m2_per_year = 0.0;
  std::vector<int> years;
  std::vector<double> exact_area_m2;

  double change() const { return exact_area_m2.back() - exact_area_m2.front(); }
};

struct FleetTruth {
  std::vector<SiteTruth> sites;
  double mean_injected_change() const;
};

/// Writes sites.csv, observations.jsonl, rasters/, masks/ (truth),
/// masks_pred/, ntl/, eval_pairs.csv and truth.csv under out_dir.
FleetTruth write_synthetic_catalog(const FleetSpec& spec,
                                   const std::filesystem::path& out_dir,
                                   unsigned jobs = 1);

}  // namespace sitedev::synth
