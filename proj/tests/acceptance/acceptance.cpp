// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails or exceeds its time budget.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "../oracles.hpp"
#include "commands.hpp"
#include "sitedev/analytics.hpp"
#include "sitedev/checksum.hpp"
#include "sitedev/dataset.hpp"
#include "sitedev/error.hpp"
#include "sitedev/ntl.hpp"
#include "sitedev/raster.hpp"
#include "sitedev/synth.hpp"

namespace fs = std::filesystem;
using namespace sitedev;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Accumulates failures; the first few messages are kept for the report.
class Check {
 public:
  void expect(bool cond, const std::string& what) {
    ++total_;
    if (cond) return;
    ++failed_;
    if (failed_ <= 3) msgs_ << (failed_ > 1 ? "; " : "") << what;
  }
  Outcome outcome(const std::string& summary) const {
    if (failed_ == 0) return {true, summary};
    return {false, std::to_string(failed_) + "/" + std::to_string(total_) + " checks failed: " + msgs_.str()};
  }

 private:
  std::size_t total_ = 0, failed_ = 0;
  std::ostringstream msgs_;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "sitedev_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RasterGrid::Meta imagery_meta() {
  RasterGrid::Meta m;
  m.acquired = {2020, 1, 1};
  return m;
}

InstanceMask random_blob(std::mt19937& gen, std::size_t h, std::size_t w) {
  std::vector<std::uint8_t> bits(h * w, 0);
  const std::size_t r0 = gen() % h, c0 = gen() % w;
  const std::size_t r1 = std::min(h, r0 + 1 + gen() % 16), c1 = std::min(w, c0 + 1 + gen() % 16);
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = c0; c < c1; ++c)
      if (gen() % 4 != 0) bits[r * w + c] = 1;
  bits[r0 * w + c0] = 1;
  return *InstanceMask::from_bitmap(h, w, bits);
}

MaskSet random_set(std::mt19937& gen, std::size_t h, std::size_t w, std::size_t max_n, Provenance p,
                   std::size_t min_n = 0) {
  std::vector<InstanceMask> v;
  const std::size_t n = min_n + gen() % (max_n - min_n + 1);
  for (std::size_t i = 0; i < n; ++i) v.push_back(random_blob(gen, h, w));
  return MaskSet(h, w, p, std::move(v));
}

// ---------------------------------------------------------------------------

Outcome luminance() {
  Check ck;
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> r(1000), g(1000), b(1000);
  for (std::size_t i = 0; i < 1000; ++i) r[i] = u(gen), g[i] = u(gen), b[i] = u(gen);
  const auto m = imagery_meta();
  const auto y = rgb_to_luminance(RasterGrid(1, 1000, r, m), RasterGrid(1, 1000, g, m),
                                  RasterGrid(1, 1000, b, m));
  double worst = 0.0;
  for (std::size_t i = 0; i < 1000; ++i)
    worst = std::max(worst, std::fabs(y.at(0, i) - (0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i])));
  ck.expect(worst <= 1e-12, "max error " + std::to_string(worst));
  const auto one = RasterGrid::filled(1, 1, 1.0, m), zero = RasterGrid::filled(1, 1, 0.0, m);
  ck.expect(rgb_to_luminance(one, zero, zero).at(0, 0) == 0.299, "pure red");
  ck.expect(rgb_to_luminance(zero, one, zero).at(0, 0) == 0.587, "pure green");
  ck.expect(rgb_to_luminance(zero, zero, one).at(0, 0) == 0.114, "pure blue");
  std::ostringstream s;
  s << "1000 triples, max |error| " << worst << ", pure channels exact";
  return ck.outcome(s.str());
}

Outcome structural_area_bound() {
  Check ck;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    synth::SceneSpec spec;
    spec.seed = seed;
    const auto s = synth::generate_scene(spec);
    const double a = structural_area(s.masks, spec.extent_m2());
    ck.expect(a == s.exact_area_m2, "aligned seed " + std::to_string(seed));
  }
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    synth::SceneSpec spec;
    spec.seed = 1000 + seed;
    spec.subpixel = true;
    const auto s = synth::generate_scene(spec);
    const double err = std::fabs(structural_area(s.masks, spec.extent_m2()) - s.exact_area_m2);
    const double bound = spec.pixel_size_m * spec.pixel_size_m * s.perimeter_px;
    worst_ratio = std::max(worst_ratio, err / bound);
    ck.expect(err <= bound, "sub-pixel seed " + std::to_string(seed));
  }
  std::ostringstream s;
  s << "50 aligned scenes exact, 50 sub-pixel scenes within bound (worst error/bound "
    << worst_ratio << ")";
  return ck.outcome(s.str());
}

Outcome overlap_removal() {
  Check ck;
  std::mt19937 gen(303);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_set(gen, 64, 64, 50, Provenance::GroundTruthGeocoded);
    ck.expect(union_pixel_count(s) == oracle::union_count(s), "set " + std::to_string(i));
  }
  return ck.outcome("200 random mask sets agree with the brute-force union");
}

Outcome average_precision_rules() {
  Check ck;
  std::mt19937 gen(404);
  // k exact copies of truth boxes (IoU 1) and m predictions overlapping a
  // truth at IoU 1/3, below T = 0.5.
  for (std::size_t k = 0; k <= 6; ++k)
    for (std::size_t m = 0; m <= 6; ++m) {
      if (k + m == 0) continue;
      std::vector<InstanceMask> truth, pred;
      for (std::size_t i = 0; i < k + m; ++i)
        truth.push_back(InstanceMask::rectangle(64, 128, 0, 10 * i, 4, 10 * i + 4));
      for (std::size_t i = 0; i < k; ++i) pred.push_back(truth[i]);
      for (std::size_t i = k; i < k + m; ++i)
        pred.push_back(InstanceMask::rectangle(64, 128, 0, 10 * i + 2, 4, 10 * i + 6));
      const MaskSet p(64, 128, Provenance::ModelPrediction, pred);
      const MaskSet t(64, 128, Provenance::GroundTruthGeocoded, truth);
      ck.expect(average_precision(p, t, 0.5) == static_cast<double>(k) / static_cast<double>(k + m),
                "k=" + std::to_string(k) + " m=" + std::to_string(m));
    }
  for (int i = 0; i < 50; ++i) {
    const auto p = random_set(gen, 32, 32, 12, Provenance::ModelPrediction, 1);
    const auto t = random_set(gen, 32, 32, 12, Provenance::GroundTruthGeocoded);
    const double a1 = average_precision(p, t, 0.1), a3 = average_precision(p, t, 0.3),
                 a5 = average_precision(p, t, 0.5);
    ck.expect(a1 >= a3 && a3 >= a5, "random set " + std::to_string(i));
  }
  return ck.outcome("AP = k/(k+m) on 48 constructed sets; non-increasing over T on 50 random sets");
}

Outcome iou_oracle() {
  Check ck;
  std::mt19937 gen(505);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto a = random_blob(gen, 32, 32), b = random_blob(gen, 32, 32);
    const double d = std::fabs(iou(a, b) - oracle::pixel_iou(a, b));
    worst = std::max(worst, d);
    ck.expect(d <= 1e-12, "pair " + std::to_string(i));
  }
  std::ostringstream s;
  s << "500 pairs, max |difference| " << worst;
  return ck.outcome(s.str());
}

Outcome ntl_rules() {
  Check ck;
  std::mt19937 gen(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RasterGrid::Meta m;
  m.band_kind = BandKind::Radiance;
  m.acquired = {2019, 6, 1};
  m.period = YearMonth{2019, 6};
  m.transform.origin_lon = 30.0;
  m.transform.origin_lat = 10.0;
  m.transform.anchor_lat = 10.0;
  m.transform.pixel_size_x_m = m.transform.pixel_size_y_m = 500.0;
  const double cell = 500.0;
  const std::size_t n = 8;

  auto footprint = [&](double east, double south, double side) {
    ntl::Footprint f;
    f.side_m = side;
    m.transform.to_geographic(east, south, f.center_lon, f.center_lat);
    return f;
  };

  // Overlap fractions against a 100x100 sub-sampling of each cell.
  double worst = 0.0;
  const ntl::NtlGrid flat(RasterGrid::filled(n, n, 1.0, m));
  for (int trial = 0; trial < 100; ++trial) {
    const double side = 300.0 + 900.0 * u(gen);
    const double east = side / 2 + u(gen) * (n * cell - side);
    const double south = side / 2 + u(gen) * (n * cell - side);
    std::map<std::size_t, double> got;
    for (const auto& c : ntl::overlapping_cells(flat, footprint(east, south, side)))
      got[c.cell] = c.fraction;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        const double want = oracle::subsampled_overlap(
            c * cell, (c + 1) * cell, r * cell, (r + 1) * cell, east - side / 2, east + side / 2,
            south - side / 2, south + side / 2);
        const auto it = got.find(r * n + c);
        if (it != got.end()) {
          worst = std::max(worst, std::fabs(it->second - want));
          ck.expect(std::fabs(it->second - want) <= 0.02, "overlap fraction");
        } else {
          ck.expect(want < 0.5 + 0.02, "missing qualifying cell");
        }
        if (want < 0.5 - 0.02) ck.expect(it == got.end(), "sub-threshold cell reported");
      }
  }

  // Labels depend only on qualifying cells.
  int labeled = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(n * n);
    for (double& x : v) x = 60.0 * u(gen);
    const auto f = footprint(400.0 + 3200.0 * u(gen), 400.0 + 3200.0 * u(gen), 800.0);
    const ntl::NtlGrid g(RasterGrid(n, n, v, m));
    const auto cells = ntl::overlapping_cells(g, f);
    std::vector<bool> q(v.size(), false);
    for (const auto& c : cells) q[c.cell] = true;
    auto w = v;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (!q[i]) w[i] = 1000.0 * u(gen);
    const ntl::NtlGrid h(RasterGrid(n, n, w, m));
    if (cells.empty()) {
      bool a = false, b = false;
      try { ntl::ntl_label(g, f); } catch (const Error&) { a = true; }
      try { ntl::ntl_label(h, f); } catch (const Error&) { b = true; }
      ck.expect(a && b, "no-label case changed");
      continue;
    }
    ++labeled;
    const auto la = ntl::ntl_label(g, f), lb = ntl::ntl_label(h, f);
    ck.expect(la.radiance == lb.radiance && la.cell == lb.cell, "label changed");
  }

  // A 2011-06 acquisition is never labeled, even with a valid grid on disk.
  const auto dir = scratch("ntl_dates");
  save_raster(RasterGrid::filled(n, n, 9.0, m), dir / "ntl.ras");
  dataset::Site site{"s", "S", 0, 0, dataset::SiteClass::Factory};
  m.transform.to_geographic(2000.0, 2000.0, site.lon, site.lat);
  std::vector<dataset::Observation> obs;
  for (int month = 1; month <= 12; ++month) {
    dataset::Observation o;
    o.site_id = "s";
    o.acquired = {2011, month, 15};
    o.raster_ref = "none.ras";
    o.ntl_ref = "ntl.ras";
    o.ntl_label = 5.0;  // stale value must be cleared
    obs.push_back(o);
  }
  obs[5].acquired = {2011, 6, 1};
  const auto res = dataset::attach_labels(obs, std::span(&site, 1), dir);
  for (const auto& o : res.observations) ck.expect(!o.ntl_label.has_value(), "2011 observation labeled");
  ck.expect(!ntl::eligible({2011, 6, 1}) && !ntl::eligible({2011, 6, 30}), "2011-06 eligible");

  std::ostringstream s;
  s << "100 footprints, max |fraction error| " << worst << "; " << labeled
    << "/100 invariance trials labeled and unchanged; 2011 dates unlabeled";
  return ck.outcome(s.str());
}

Outcome ols_oracle() {
  Check ck;
  std::mt19937 gen(707);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::normal_distribution<double> noise(0.0, 5.0);
  double worst = 0.0;
  auto rel = [](double got, long double want) {
    return static_cast<double>(std::fabs(got - want) / std::max<long double>(1.0L, std::fabs(want)));
  };
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 3 + gen() % 200;
    std::vector<double> x(k), y(k);
    std::vector<analytics::Point> pts(k);
    const double slope = u(gen), icpt = 50.0 * u(gen), shift = trial % 2 ? 2018.0 : 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = shift + u(gen);
      y[i] = slope * x[i] + icpt + noise(gen);
      pts[i] = {x[i], y[i]};
    }
    const auto fit = analytics::ols_fit(pts);
    const auto want = oracle::normal_equations(x, y);
    const double e = std::max(rel(fit.slope, want.slope), rel(fit.intercept, want.intercept));
    worst = std::max(worst, e);
    ck.expect(e <= 1e-9, "dataset " + std::to_string(trial));
  }
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<analytics::Point> pts;
    const double slope = u(gen), icpt = u(gen);
    for (int i = 0; i < 10; ++i) {
      const double xv = u(gen);
      pts.push_back({xv, slope * xv + icpt});
    }
    ck.expect(std::fabs(analytics::ols_fit(pts).r_squared - 1.0) <= 1e-12, "collinear R^2");
  }
  std::ostringstream s;
  s << "100 datasets, max relative error " << worst << "; collinear R^2 = 1";
  return ck.outcome(s.str());
}

Outcome percent_decline() {
  Check ck;
  std::vector<analytics::YearValue> obs;
  for (int yr = 2018; yr <= 2021; ++yr) {
    const double level = 80000.0 * (1.0 - 0.075 * (yr - 2018));
    for (double off : {-1500.0, -250.0, 250.0, 1500.0}) obs.push_back({yr, level + off});
  }
  const auto r = analytics::yearly_trend(obs);
  ck.expect(std::fabs(r.pct_change_per_year + 7.5) <= 1e-9, "per-year");
  ck.expect(std::fabs(r.pct_change_total + 22.5) <= 1e-9, "total");
  std::ostringstream s;
  s.precision(15);
  s << "pct_per_year " << r.pct_change_per_year << ", pct_total " << r.pct_change_total;
  return ck.outcome(s.str());
}

Outcome split_contract() {
  Check ck;
  std::mt19937 gen(909);
  const dataset::SplitFractions fr{0.75, 0.125, 0.125};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 50 + gen() % 451;
    dataset::Catalog cat;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "site" + std::to_string(i);
      cat.sites.push_back({id, id, 0.0, 0.0, dataset::SiteClass::Factory});
      const std::size_t images = 1 + gen() % 10;
      for (std::size_t k = 0; k < images; ++k) {
        dataset::Observation o;
        o.site_id = id;
        o.acquired = {2015 + static_cast<int>(k), 1, 1};
        o.raster_ref = "r.ras";
        cat.observations.push_back(o);
      }
    }
    const auto per_site = dataset::images_per_site(cat);
    const std::uint64_t seed = gen();
    const auto a = dataset::split_by_site(per_site, fr, seed);

    // Exhaustive and disjoint: every site exactly once (map keys are unique).
    std::set<std::string> ids;
    for (const auto& s : cat.sites) ids.insert(s.id);
    std::set<std::string> assigned;
    for (const auto& [id, p] : a.partition_of) assigned.insert(id);
    ck.expect(assigned == ids, "assignment not exhaustive");

    // Site-atomic: each observation lands where its site does.
    std::map<dataset::Partition, std::set<std::string>> sites_in;
    std::map<dataset::Partition, double> images;
    for (const auto& o : cat.observations) {
      const auto p = a.partition_of.at(o.site_id);
      sites_in[p].insert(o.site_id);
      images[p] += 1.0;
    }
    std::size_t seen = 0;
    for (const auto& [p, s] : sites_in) seen += s.size();
    ck.expect(seen == n, "a site spans partitions");

    std::size_t largest = 0;
    for (const auto& s : per_site) largest = std::max(largest, s.images);
    const double total = static_cast<double>(cat.observations.size());
    for (auto [p, f] : {std::pair{dataset::Partition::Train, fr.train},
                        {dataset::Partition::Validation, fr.validation},
                        {dataset::Partition::Test, fr.test}}) {
      const double dev = std::fabs(images[p] - f * total);
      worst = std::max(worst, dev / static_cast<double>(largest));
      ck.expect(dev <= static_cast<double>(largest), "proportion outside one site's images");
    }
    ck.expect(dataset::split_by_site(per_site, fr, seed).partition_of == a.partition_of,
              "not deterministic");
  }
  std::ostringstream s;
  s << "100 catalogs; worst deviation " << worst << " of the largest site's image count";
  return ck.outcome(s.str());
}

struct PipelineRun {
  double fleet_mean = 0.0, fleet_sd = 0.0, slope = 0.0;
  std::size_t sites = 0;
};

std::map<std::string, std::string> read_metrics(const fs::path& csv) {
  std::map<std::string, std::string> m;
  std::istringstream in(dataset::read_file(csv));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    m[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return m;
}

// synth -> label -> split -> trend through the command layer.
PipelineRun run_pipeline(const fs::path& root, cli::RunConfig c) {
  std::ostringstream out, log;
  c.out = (root / "catalog").string();
  if (cli::cmd_synth(c, out, log) != 0) throw std::runtime_error("synth failed: " + log.str());
  c.catalog = c.out;
  c.out = (root / "label").string();
  if (cli::cmd_label(c, out, log) != 0) throw std::runtime_error("label failed: " + log.str());
  c.out = (root / "split").string();
  if (cli::cmd_split(c, out, log) != 0) throw std::runtime_error("split failed: " + log.str());
  c.out = (root / "trend").string();
  if (cli::cmd_trend(c, out, log) != 0) throw std::runtime_error("trend failed: " + log.str());
  const auto m = read_metrics(root / "trend" / "trend_summary.csv");
  return {std::stod(m.at("site_change_mean")), std::stod(m.at("site_change_sd")),
          std::stod(m.at("slope")), std::stoul(m.at("site_change_sites"))};
}

// Mean over sites of (last - first) exact generated area, from truth.csv.
double injected_fleet_change(const fs::path& truth_csv) {
  std::istringstream in(dataset::read_file(truth_csv));
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::pair<int, double>> first, last;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string id, year, area;
    std::getline(row, id, ',');
    std::getline(row, year, ',');
    std::getline(row, area, ',');
    const int y = std::stoi(year);
    const double a = std::stod(area);
    if (!first.count(id) || y < first[id].first) first[id] = {y, a};
    if (!last.count(id) || y > last[id].first) last[id] = {y, a};
  }
  double sum = 0.0;
  for (const auto& [id, f] : first) sum += last[id].second - f.second;
  return sum / static_cast<double>(first.size());
}

Outcome end_to_end() {
  Check ck;
  const auto root = scratch("pipeline");
  int sign_ok = 0, mean_ok = 0;
  double worst_z = 0.0;
  for (int run = 0; run < 20; ++run) {
    cli::RunConfig c;
    c.synth_sites = 50;
    c.seed = 1000 + run;
    // Alternate growth and decline so the sign check has teeth.
    c.synth_mean_growth = run % 2 ? -1500.0 : 1500.0;
    c.synth_growth_sd = 500.0;
    c.synth_jitter = 500.0;
    const auto dir = root / ("run" + std::to_string(run));
    const auto r = run_pipeline(dir, c);
    const double injected = injected_fleet_change(dir / "catalog" / "truth.csv");
    const double se = r.fleet_sd / std::sqrt(static_cast<double>(r.sites));
    const double z = std::fabs(r.fleet_mean - injected) / se;
    worst_z = std::max(worst_z, z);
    const bool in_band = z <= 2.0 && r.sites == 50;
    const bool sign = std::signbit(r.slope) == std::signbit(c.synth_mean_growth) && r.slope != 0.0 &&
                      std::signbit(r.fleet_mean) == std::signbit(c.synth_mean_growth);
    mean_ok += in_band;
    sign_ok += sign;
    ck.expect(in_band, "run " + std::to_string(run) + " |mean - injected| = " + std::to_string(z) + " SE");
    ck.expect(sign, "run " + std::to_string(run) + " trend sign");
  }
  fs::remove_all(root);
  std::ostringstream s;
  s << mean_ok << "/20 runs within 2 SE of the injected fleet-mean change (worst " << worst_z
    << " SE), " << sign_ok << "/20 trend signs recovered";
  return ck.outcome(s.str());
}

std::map<std::string, std::string> csv_checksums(const fs::path& root) {
  std::map<std::string, std::string> sums;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".csv")
      sums[fs::relative(e.path(), root).string()] = sha256_file(e.path());
  return sums;
}

void full_pipeline(const fs::path& root) {
  cli::RunConfig c;
  c.synth_sites = 20;
  c.seed = 77;
  std::ostringstream out, log;
  auto step = [&](const char* name, auto fn) {
    c.out = (root / name).string();
    if (fn(c, out, log) != 0) throw std::runtime_error(std::string(name) + " failed: " + log.str());
  };
  step("catalog", cli::cmd_synth);
  c.catalog = (root / "catalog").string();
  step("label", cli::cmd_label);
  step("split", cli::cmd_split);
  c.splits = (root / "split" / "splits.json").string();
  step("trend", cli::cmd_trend);
  c.value = "ntl";
  step("trend_ntl", cli::cmd_trend);
  c.pairs = (root / "catalog" / "eval_pairs.csv").string();
  step("eval", cli::cmd_eval);
  c.resample_h = 64;
  c.resample_w = 48;
  step("bundle", cli::cmd_bundle);
  step("report", cli::cmd_report);
  c.inputs = {(root / "catalog" / "rasters").string() + "/" +
              fs::directory_iterator(root / "catalog" / "rasters")->path().filename().string()};
  c.resample = true;
  c.out = (root / "convert").string();
  if (cli::cmd_convert(c, log) != 0) throw std::runtime_error("convert failed: " + log.str());
}

Outcome determinism() {
  Check ck;
  const auto a = scratch("determinism_a"), b = scratch("determinism_b");
  full_pipeline(a);
  full_pipeline(b);
  const auto sa = csv_checksums(a), sb = csv_checksums(b);
  ck.expect(sa.size() >= 10, "only " + std::to_string(sa.size()) + " CSV files produced");
  ck.expect(sa == sb, "checksum sets differ");
  for (const auto& [rel, sum] : sa) {
    const auto it = sb.find(rel);
    ck.expect(it != sb.end() && it->second == sum, rel + " differs");
  }
  // Non-CSV artifacts too: catalog, splits, manifest and rasters.
  std::size_t other = 0;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file() && e.path().extension() != ".csv" &&
        e.path().filename() != "run_config.json") {
      ++other;
      ck.expect(sha256_file(e.path()) == sha256_file(b / fs::relative(e.path(), a)),
                fs::relative(e.path(), a).string() + " differs");
    }
  fs::remove_all(a);
  fs::remove_all(b);
  return ck.outcome(std::to_string(sa.size()) + " CSV files and " + std::to_string(other) +
                    " other artifacts byte-identical across reruns");
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "luminance exactness", 1.0, luminance},
      {2, "structural area exactness and quantization bound", 30.0, structural_area_bound},
      {3, "overlap removal", 10.0, overlap_removal},
      {4, "average precision", 10.0, average_precision_rules},
      {5, "IoU oracle", 5.0, iou_oracle},
      {6, "NTL rules", 10.0, ntl_rules},
      {7, "OLS and R^2", 5.0, ols_oracle},
      {8, "percent-change arithmetic", 1.0, percent_decline},
      {9, "split contract", 10.0, split_contract},
      {10, "end-to-end synthetic pipeline", 120.0, end_to_end},
      {11, "determinism", 120.0, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.ok && in_time;
    failures += !pass;
    std::ostringstream t;
    t.precision(3);
    t << secs << " s / " << c.budget_s << " s";
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << " (" << t.str()
              << (in_time ? "" : ", over budget") << "): " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
