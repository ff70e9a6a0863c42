#include "sitedev/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sitedev/error.hpp"
#include "sitedev/ntl.hpp"
#include "sitedev/parallel.hpp"
#include "sitedev/random.hpp"
#include "sitedev/report.hpp"

namespace sitedev::synth {

namespace {

constexpr int kPlacementRetries = 500;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

RasterGrid::Meta scene_meta(const SceneSpec& spec) {
  RasterGrid::Meta meta;
  meta.band_kind = BandKind::Panchromatic;
  meta.bit_depth = 32;
  meta.acquired = spec.acquired;
  GeoTransform t;
  t.crs = CrsTag::LocalMeters;
  t.anchor_lat = spec.center_lat;
  t.origin_lon = spec.center_lon;
  t.origin_lat = spec.center_lat;
  t.pixel_size_x_m = t.pixel_size_y_m = spec.pixel_size_m;
  t.to_geographic(-0.5 * spec.grid_w * spec.pixel_size_m, -0.5 * spec.grid_h * spec.pixel_size_m,
                  t.origin_lon, t.origin_lat);
  meta.transform = t;
  return meta;
}

bool separated(const Rect& a, const Rect& b, double gap) {
  return a.col0 + a.width + gap <= b.col0 || b.col0 + b.width + gap <= a.col0 ||
         a.row0 + a.height + gap <= b.row0 || b.row0 + b.height + gap <= a.row0;
}

/// Places rectangles of the given pixel sizes without overlap.
std::vector<Rect> place(const SceneSpec& spec, std::span<const std::pair<double, double>> sizes,
                        bool integer_positions, Rng& rng) {
  std::vector<Rect> rects;
  const double gap = static_cast<double>(spec.gap_px);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto [h, w] = sizes[i];
    if (h > spec.grid_h || w > spec.grid_w)
      throw Error(ErrorKind::Unattainable, "rectangle " + std::to_string(i) + " exceeds the grid");
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
      Rect r{0.0, 0.0, h, w};
      if (integer_positions) {
        r.row0 = static_cast<double>(rng.between(0, static_cast<long long>(spec.grid_h - h)));
        r.col0 = static_cast<double>(rng.between(0, static_cast<long long>(spec.grid_w - w)));
      } else {
        r.row0 = rng.uniform(0.0, spec.grid_h - h);
        r.col0 = rng.uniform(0.0, spec.grid_w - w);
      }
      placed = std::all_of(rects.begin(), rects.end(),
                           [&](const Rect& o) { return separated(r, o, gap); });
      if (placed) rects.push_back(r);
    }
    if (!placed)
      throw Error(ErrorKind::Unattainable, "could not place rectangle " + std::to_string(i) +
                                               " without overlap after " +
                                               std::to_string(kPlacementRetries) + " attempts");
  }
  return rects;
}

/// Pixel-center rasterization: index i is covered iff lo <= i + 0.5 < lo + len.
std::pair<std::size_t, std::size_t> covered(double lo, double len, std::size_t n) {
  const double a = std::ceil(lo - 0.5), b = std::ceil(lo + len - 0.5);
  return {static_cast<std::size_t>(std::clamp(a, 0.0, static_cast<double>(n))),
          static_cast<std::size_t>(std::clamp(b, 0.0, static_cast<double>(n)))};
}

Scene render(const SceneSpec& spec, std::vector<Rect> rects, Rng& rng) {
  const std::size_t h = spec.grid_h, w = spec.grid_w;
  std::vector<std::uint8_t> structure(h * w, 0);
  std::vector<InstanceMask> instances;
  double area = 0.0, perimeter = 0.0;
  const double px_area = spec.pixel_size_m * spec.pixel_size_m;
  for (const Rect& r : rects) {
    area += r.height * r.width * px_area;
    perimeter += 2.0 * (r.height + r.width);
    const auto [r0, r1] = covered(r.row0, r.height, h);
    const auto [c0, c1] = covered(r.col0, r.width, w);
    if (r1 <= r0 || c1 <= c0) continue;
    instances.push_back(InstanceMask::rectangle(h, w, r0, c0, r1, c1));
    for (std::size_t y = r0; y < r1; ++y)
      std::fill(structure.begin() + y * w + c0, structure.begin() + y * w + c1, 1);
  }
  std::vector<double> values(h * w);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double base = structure[i] ? spec.structure_level : spec.background;
    const double noise = spec.noise_sd > 0.0 ? rng.normal(0.0, spec.noise_sd) : 0.0;
    values[i] = std::clamp(base + noise, 0.0, 1.0);
  }
  return Scene{RasterGrid(h, w, std::move(values), scene_meta(spec)),
               MaskSet(h, w, Provenance::GroundTruthGeocoded, std::move(instances)),
               std::move(rects), area, perimeter};
}

}  // namespace

void SceneSpec::validate() const {
  if (grid_h == 0 || grid_w == 0) throw Error(ErrorKind::Validation, "scene grid must be non-empty");
  if (!(pixel_size_m > 0.0)) throw Error(ErrorKind::Validation, "pixel size must be positive");
  if (min_structures > max_structures)
    throw Error(ErrorKind::Validation, "min_structures exceeds max_structures");
  if (!(min_rect_m > 0.0) || min_rect_m > max_rect_m)
    throw Error(ErrorKind::Validation, "invalid rectangle size range");
  if (structure_level == background)
    throw Error(ErrorKind::Validation, "structure level must differ from background");
  if (background < 0.0 || background > 1.0 || structure_level < 0.0 || structure_level > 1.0)
    throw Error(ErrorKind::Validation, "luminance levels must lie in [0, 1]");
  if (noise_sd < 0.0) throw Error(ErrorKind::Validation, "noise sd must be non-negative");
  if (max_rect_m / pixel_size_m > static_cast<double>(std::min(grid_h, grid_w)))
    throw Error(ErrorKind::Validation, "largest rectangle does not fit in the extent");
}

double SceneSpec::extent_m2() const {
  return static_cast<double>(grid_h) * static_cast<double>(grid_w) * pixel_size_m * pixel_size_m;
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto count = static_cast<std::size_t>(
      rng.between(static_cast<long long>(spec.min_structures),
                  static_cast<long long>(spec.max_structures)));
  std::vector<std::pair<double, double>> sizes;
  for (std::size_t i = 0; i < count; ++i) {
    double hp = rng.uniform(spec.min_rect_m, spec.max_rect_m) / spec.pixel_size_m;
    double wp = rng.uniform(spec.min_rect_m, spec.max_rect_m) / spec.pixel_size_m;
    if (!spec.subpixel) {
      hp = std::max(1.0, std::round(hp));
      wp = std::max(1.0, std::round(wp));
    }
    sizes.emplace_back(hp, wp);
  }
  auto rects = place(spec, sizes, !spec.subpixel, rng);
  return render(spec, std::move(rects), rng);
}

Scene generate_scene_with_area(const SceneSpec& spec, double total_area_m2) {
  spec.validate();
  if (!(total_area_m2 >= 0.0) || total_area_m2 > spec.extent_m2())
    throw Error(ErrorKind::Unattainable, "structure area outside [0, extent]");
  Rng rng(spec.seed);
  std::size_t count = 0;
  if (total_area_m2 > 0.0)
    count = static_cast<std::size_t>(
        rng.between(static_cast<long long>(std::max<std::size_t>(1, spec.min_structures)),
                    static_cast<long long>(std::max<std::size_t>(1, spec.max_structures))));
  std::vector<double> weights(count);
  double weight_sum = 0.0;
  for (double& wgt : weights) weight_sum += (wgt = rng.uniform(0.5, 1.5));
  std::vector<std::pair<double, double>> sizes;
  const double px_area = spec.pixel_size_m * spec.pixel_size_m;
  for (double wgt : weights) {
    const double area_px = total_area_m2 * (wgt / weight_sum) / px_area;
    const double aspect = rng.uniform(0.6, 1.6);
    const double wp = std::sqrt(area_px * aspect);
    sizes.emplace_back(area_px / wp, wp);
  }
  auto rects = place(spec, sizes, false, rng);
  return render(spec, std::move(rects), rng);
}

// ---------------------------------------------------------------------------
// Prediction perturbation

namespace {

struct Pixel {
  long row, col;
};

std::vector<Pixel> pixels_of(const std::vector<std::uint8_t>& bits, std::size_t w) {
  std::vector<Pixel> out;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.push_back({static_cast<long>(i / w), static_cast<long>(i % w)});
  return out;
}

struct Window {
  long r0, r1, c0, c1;
};

/// 3x3-square dilation (radius > 0) or erosion (radius < 0), applied |radius|
/// times. Only pixels inside `win` (which must hold the result) are visited.
std::vector<std::uint8_t> morph(std::vector<std::uint8_t> bits, std::size_t h, std::size_t w,
                                int radius, Window win) {
  const bool dilate = radius > 0;
  const std::size_t y0 = static_cast<std::size_t>(std::max(0L, win.r0));
  const std::size_t y1 = static_cast<std::size_t>(std::min(static_cast<long>(h), win.r1));
  const std::size_t x0 = static_cast<std::size_t>(std::max(0L, win.c0));
  const std::size_t x1 = static_cast<std::size_t>(std::min(static_cast<long>(w), win.c1));
  for (int step = 0; step < std::abs(radius); ++step) {
    std::vector<std::uint8_t> next(bits.size(), 0);
    for (std::size_t y = y0; y < y1; ++y)
      for (std::size_t x = x0; x < x1; ++x) {
        bool any = false, all = true;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const long yy = static_cast<long>(y) + dy, xx = static_cast<long>(x) + dx;
            const bool in = yy >= 0 && xx >= 0 && yy < static_cast<long>(h) &&
                            xx < static_cast<long>(w) && bits[yy * w + xx];
            any |= in;
            all &= in;
          }
        next[y * w + x] = dilate ? any : all;
      }
    bits = std::move(next);
  }
  return bits;
}

struct Candidate {
  int radius;
  long dy, dx;
  double iou;
};

std::pair<InstanceMask, double> perturb_one(const InstanceMask& truth, double target,
                                            std::size_t index, Rng& rng) {
  if (target == 1.0) return {truth, 1.0};
  const std::size_t h = truth.grid_h(), w = truth.grid_w();
  const auto bits = truth.to_bitmap();

  long r0 = static_cast<long>(h), r1 = 0, c0 = static_cast<long>(w), c1 = 0;
  for (const Pixel& p : pixels_of(bits, w)) {
    r0 = std::min(r0, p.row);
    r1 = std::max(r1, p.row + 1);
    c0 = std::min(c0, p.col);
    c1 = std::max(c1, p.col + 1);
  }
  const long bh = r1 - r0, bw = c1 - c0;
  const Window win{r0 - 3, r1 + 3, c0 - 3, c1 + 3};
  const double truth_count = static_cast<double>(truth.pixel_count());

  // Shifts: every offset along the axes and diagonals, plus a coarse 2-D grid.
  std::vector<std::pair<long, long>> shifts;
  const long reach = std::max(bh, bw) + 2;
  for (long d = -reach; d <= reach; ++d) {
    if (d == 0) continue;
    if (std::abs(d) <= bh + 2) shifts.emplace_back(d, 0);
    if (std::abs(d) <= bw + 2) shifts.emplace_back(0, d);
    shifts.emplace_back(d, d);
    shifts.emplace_back(d, -d);
  }
  const long step_y = std::max<long>(1, (2 * bh + 5) / 11), step_x = std::max<long>(1, (2 * bw + 5) / 11);
  for (long dy = -bh - 2; dy <= bh + 2; dy += step_y)
    for (long dx = -bw - 2; dx <= bw + 2; dx += step_x) shifts.emplace_back(dy, dx);
  shifts.emplace_back(0, 0);

  std::vector<Candidate> candidates;
  double best_err = 2.0;
  for (int radius : {-1, 0, 1, 2}) {
    const auto shape = radius == 0 ? bits : morph(bits, h, w, radius, win);
    const auto px = pixels_of(shape, w);
    if (px.empty()) continue;
    for (const auto& [dy, dx] : shifts) {
      if (radius == 0 && dy == 0 && dx == 0) continue;
      double inter = 0.0, kept = 0.0;
      for (const Pixel& p : px) {
        const long y = p.row + dy, x = p.col + dx;
        if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) continue;
        kept += 1.0;
        inter += bits[y * w + x];
      }
      if (kept == 0.0) continue;
      const double v = inter / (truth_count + kept - inter);
      const double err = std::abs(v - target);
      if (err <= kPerturbTolerance) {
        candidates.push_back({radius, dy, dx, v});
        best_err = std::min(best_err, err);
      }
    }
  }
  if (candidates.empty())
    throw Error(ErrorKind::Unattainable, "instance " + std::to_string(index) +
                                             ": no translation/dilation reaches IoU " +
                                             report::format_number(target) + " +/- 0.05");
  std::vector<const Candidate*> near;
  for (const Candidate& c : candidates)
    if (std::abs(c.iou - target) <= best_err + 0.01) near.push_back(&c);
  const Candidate& pick = *near[rng.below(near.size())];

  const auto shape = pick.radius == 0 ? bits : morph(bits, h, w, pick.radius, win);
  std::vector<std::uint8_t> moved(bits.size(), 0);
  for (const Pixel& p : pixels_of(shape, w)) {
    const long y = p.row + pick.dy, x = p.col + pick.dx;
    if (y >= 0 && x >= 0 && y < static_cast<long>(h) && x < static_cast<long>(w)) moved[y * w + x] = 1;
  }
  InstanceMask out = *InstanceMask::from_bitmap(h, w, moved);
  const double achieved = iou(out, truth);
  return {std::move(out), achieved};
}

}  // namespace

PerturbResult perturb_masks(const MaskSet& truths, double target_iou, std::uint64_t seed) {
  std::vector<double> targets(truths.size(), target_iou);
  return perturb_masks(truths, targets, seed);
}

PerturbResult perturb_masks(const MaskSet& truths, std::span<const double> target_ious,
                            std::uint64_t seed) {
  if (target_ious.size() != truths.size())
    throw Error(ErrorKind::Dimension, "one IoU target per truth instance is required");
  for (double t : target_ious)
    if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorKind::OutOfRange, "IoU target must lie in (0, 1]");
  Rng rng(seed);
  std::vector<InstanceMask> preds;
  PerturbResult result{MaskSet(truths.grid_h(), truths.grid_w(), Provenance::ModelPrediction), {}};
  for (std::size_t i = 0; i < truths.size(); ++i) {
    auto [mask, achieved] = perturb_one(truths.instances()[i], target_ious[i], i, rng);
    preds.push_back(std::move(mask));
    result.achieved_iou.push_back(achieved);
  }
  result.predictions =
      MaskSet(truths.grid_h(), truths.grid_w(), Provenance::ModelPrediction, std::move(preds));
  return result;
}

// ---------------------------------------------------------------------------
// Growth series

GrowthSeries growth_series(const GrowthSpec& growth, const SceneSpec& scene) {
  if (growth.years.empty()) throw Error(ErrorKind::Validation, "growth series needs years");
  std::vector<int> years = growth.years;
  std::sort(years.begin(), years.end());
  if (std::adjacent_find(years.begin(), years.end()) != years.end())
    throw Error(ErrorKind::Validation, "growth series years must be distinct");

  Rng rng(growth.seed);
  GrowthSeries out;
  out.injected_slope_m2_per_year = growth.growth_m2_per_year;
  const double extent = scene.extent_m2();
  for (int year : years) {
    const double jitter = growth.jitter_sd_m2 > 0.0 ? rng.normal(0.0, growth.jitter_sd_m2) : 0.0;
    const double area = growth.base_area_m2 + growth.growth_m2_per_year * (year - years.front()) + jitter;
    if (area < 0.0 || area > extent)
      throw Error(ErrorKind::Unattainable, "year " + std::to_string(year) + ": area " +
                                               report::format_number(area) +
                                               " m2 leaves [0, extent]");
    SceneSpec spec = scene;
    spec.seed = mix_seed(scene.seed ^ growth.seed, static_cast<std::uint64_t>(year));
    spec.acquired = Date{year, scene.acquired.month, scene.acquired.day};
    out.scenes.push_back({year, area, jitter, generate_scene_with_area(spec, area)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fleets

double FleetTruth::mean_injected_change() const {
  double total = 0.0;
  for (const SiteTruth& s : sites) total += s.change();
  return sites.empty() ? 0.0 : total / static_cast<double>(sites.size());
}

namespace {

RasterGrid make_ntl_grid(const dataset::Site& site, const FleetSpec& spec, const Date& acquired,
                         double area_m2, Rng& rng) {
  constexpr std::size_t kCells = 5;
  RasterGrid::Meta meta;
  meta.band_kind = BandKind::Radiance;
  meta.bit_depth = 32;
  meta.acquired = acquired;
  meta.period = YearMonth{acquired.year, acquired.month};
  GeoTransform t;
  t.crs = CrsTag::LocalMeters;
  t.anchor_lat = site.lat;
  t.origin_lon = site.lon;
  t.origin_lat = site.lat;
  t.pixel_size_x_m = t.pixel_size_y_m = spec.ntl_cell_m;
  const double half = 0.5 * kCells * spec.ntl_cell_m;
  t.to_geographic(-half, -half, t.origin_lon, t.origin_lat);
  meta.transform = t;

  std::vector<double> cells(kCells * kCells);
  for (double& c : cells) c = rng.uniform(0.0, 2.0);
  cells[(kCells / 2) * kCells + kCells / 2] =
      std::max(0.0, spec.ntl_gain * area_m2 + rng.normal(0.0, spec.ntl_noise_sd));
  return RasterGrid(kCells, kCells, std::move(cells), std::move(meta));
}

dataset::SiteClass draw_class(Rng& rng) {
  // Weights follow a 215 / 148 / 56 factory / power station / port mix.
  const auto v = rng.below(419);
  if (v < 215) return dataset::SiteClass::Factory;
  if (v < 215 + 148) return dataset::SiteClass::PowerStation;
  return dataset::SiteClass::Port;
}

}  // namespace

FleetTruth write_synthetic_catalog(const FleetSpec& spec, const std::filesystem::path& out_dir,
                                   unsigned jobs) {
  namespace fs = std::filesystem;
  if (spec.sites == 0) throw Error(ErrorKind::Validation, "fleet needs at least one site");
  for (const char* sub : {"rasters", "masks", "masks_pred", "ntl"})
    fs::create_directories(out_dir / sub);

  Rng rng(spec.seed);
  struct Plan {
    dataset::Site site;
    GrowthSpec growth;
    std::uint64_t seed;
  };
  std::vector<Plan> plans;
  for (std::size_t i = 0; i < spec.sites; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "S%04zu", i + 1);
    Plan p;
    p.site = {id, std::string("Synthetic site ") + id, rng.uniform(100.0, 120.0),
              rng.uniform(22.0, 40.0), draw_class(rng)};
    p.growth.years = spec.years;
    p.growth.base_area_m2 = rng.uniform(spec.base_area_min_m2, spec.base_area_max_m2);
    p.growth.growth_m2_per_year = rng.normal(spec.mean_growth_m2_per_year, spec.growth_sd_m2_per_year);
    p.growth.jitter_sd_m2 = spec.jitter_sd_m2;
    p.seed = mix_seed(spec.seed, i);
    p.growth.seed = mix_seed(p.seed, 0xa5);
    plans.push_back(std::move(p));
  }

  std::vector<std::vector<dataset::Observation>> observations(plans.size());
  std::vector<std::string> eval_rows(plans.size());
  FleetTruth truth;
  truth.sites.resize(plans.size());

  parallel_for(plans.size(), jobs, [&](std::size_t i) {
    const Plan& p = plans[i];
    SceneSpec scene = spec.scene;
    scene.seed = p.seed;
    scene.center_lon = p.site.lon;
    scene.center_lat = p.site.lat;
    const GrowthSeries series = growth_series(p.growth, scene);
    Rng site_rng(mix_seed(p.seed, 0x5a));

    SiteTruth& t = truth.sites[i];
    t.site_id = p.site.id;
    t.growth_m2_per_year = p.growth.growth_m2_per_year;
    for (const YearScene& ys : series.scenes) {
      const std::string stem = p.site.id + "_" + std::to_string(ys.year);
      dataset::Observation o;
      o.site_id = p.site.id;
      o.acquired = ys.scene.raster.acquired();
      o.raster_ref = "rasters/" + stem + ".ras";
      o.masks_ref = "masks/" + stem + ".json";
      o.resolution_m = scene.pixel_size_m;
      save_raster(ys.scene.raster, out_dir / o.raster_ref);
      save_masks(ys.scene.masks, out_dir / *o.masks_ref);

      std::vector<InstanceMask> preds;
      for (const InstanceMask& m : ys.scene.masks.instances()) {
        const double target = site_rng.uniform() < spec.good_prediction_rate ? 0.8 : 0.25;
        const MaskSet one(m.grid_h(), m.grid_w(), Provenance::GroundTruthGeocoded, {m});
        try {
          preds.push_back(perturb_masks(one, target, site_rng.next()).predictions.instances()[0]);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Unattainable) throw;
          preds.push_back(m);
        }
      }
      const MaskSet pred_set(ys.scene.masks.grid_h(), ys.scene.masks.grid_w(),
                             Provenance::ModelPrediction, std::move(preds));
      save_masks(pred_set, out_dir / "masks_pred" / (stem + ".json"));
      eval_rows[i] += "masks_pred/" + stem + ".json,masks/" + stem + ".json," +
                      std::to_string(ys.year) + "\n";

      if (ntl::eligible(o.acquired)) {
        const RasterGrid grid = make_ntl_grid(p.site, spec, o.acquired, ys.scene.exact_area_m2, site_rng);
        o.ntl_ref = "ntl/" + stem + ".ras";
        o.ntl_period = grid.meta().period;
        save_raster(grid, out_dir / *o.ntl_ref);
      }
      observations[i].push_back(std::move(o));
      t.years.push_back(ys.year);
      t.exact_area_m2.push_back(ys.scene.exact_area_m2);
    }
  });

  dataset::Catalog catalog;
  std::ostringstream eval_csv, truth_csv;
  eval_csv << "pred,truth,year\n";
  truth_csv << "site_id,year,exact_area_m2,growth_m2_per_year\n";
  for (std::size_t i = 0; i < plans.size(); ++i) {
    catalog.sites.push_back(plans[i].site);
    for (auto& o : observations[i]) catalog.observations.push_back(std::move(o));
    eval_csv << eval_rows[i];
    const SiteTruth& t = truth.sites[i];
    for (std::size_t k = 0; k < t.years.size(); ++k)
      truth_csv << t.site_id << ',' << t.years[k] << ',' << report::format_number(t.exact_area_m2[k])
                << ',' << report::format_number(t.growth_m2_per_year) << '\n';
  }
  dataset::save_catalog(catalog, out_dir);
  dataset::write_file_atomic(out_dir / "eval_pairs.csv", eval_csv.str());
  dataset::write_file_atomic(out_dir / "truth.csv", truth_csv.str());
  return truth;
}

}  // namespace sitedev::synth
