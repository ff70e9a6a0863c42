#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "sitedev/error.hpp"

namespace {

using sitedev::cli::RunConfig;

// Flag values only override the config when given explicitly.
struct Overrides {
  std::optional<std::string> config, catalog, out, pairs, splits, predictions, acquired, partition,
      verify, value;
  std::vector<std::string> inputs;
  std::optional<double> side_m, origin_lon, origin_lat, pixel_size_m, center_lon, center_lat,
      ci_level, synth_mean_growth, synth_growth_sd, synth_jitter;
  std::optional<std::size_t> min_group_images, synth_sites, synth_grid;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::vector<double> thresholds, fractions;
  std::vector<int> synth_years;
  std::optional<std::string> resample_dims;
  bool crop = false, resample = false, sample_sd = false;
};

template <typename T>
void apply(const std::optional<T>& from, T& to) {
  if (from) to = *from;
}

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (o.config) {
    std::ifstream in(*o.config);
    if (!in) throw sitedev::Error(sitedev::ErrorKind::Io, "cannot open config " + *o.config);
    c = sitedev::cli::config_from_json(nlohmann::json::parse(in), c);
  }
  apply(o.catalog, c.catalog);
  apply(o.out, c.out);
  apply(o.pairs, c.pairs);
  apply(o.splits, c.splits);
  apply(o.predictions, c.predictions);
  apply(o.acquired, c.acquired);
  apply(o.partition, c.partition);
  apply(o.verify, c.verify);
  apply(o.value, c.value);
  apply(o.side_m, c.side_m);
  apply(o.origin_lon, c.origin_lon);
  apply(o.origin_lat, c.origin_lat);
  apply(o.pixel_size_m, c.pixel_size_m);
  apply(o.ci_level, c.ci_level);
  apply(o.synth_mean_growth, c.synth_mean_growth);
  apply(o.synth_growth_sd, c.synth_growth_sd);
  apply(o.synth_jitter, c.synth_jitter);
  apply(o.min_group_images, c.min_group_images);
  apply(o.synth_sites, c.synth_sites);
  apply(o.synth_grid, c.synth_grid);
  apply(o.seed, c.seed);
  apply(o.jobs, c.jobs);
  if (o.center_lon) c.center_lon = o.center_lon;
  if (o.center_lat) c.center_lat = o.center_lat;
  if (!o.inputs.empty()) c.inputs = o.inputs;
  if (!o.thresholds.empty()) c.thresholds = o.thresholds;
  if (!o.fractions.empty()) c.fractions = o.fractions;
  if (!o.synth_years.empty()) c.synth_years = o.synth_years;
  if (o.resample_dims) {
    char x = 0;
    std::istringstream ss(*o.resample_dims);
    if (!(ss >> c.resample_h >> x >> c.resample_w) || x != 'x')
      throw sitedev::Error(sitedev::ErrorKind::Validation, "--size must look like 516x426");
  }
  c.crop = c.crop || o.crop;
  c.resample = c.resample || o.resample;
  c.sample_sd = c.sample_sd || o.sample_sd;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sitedev: industrial-site development measurement toolkit"};
  app.set_version_flag("--version", sitedev::cli::kToolVersion);
  app.require_subcommand(1);
  Overrides o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config mirroring the run configuration");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--jobs", o.jobs, "worker threads");
  };
  auto catalog = [&](CLI::App* sub) { sub->add_option("--catalog", o.catalog, "catalog directory"); };

  auto* convert = app.add_subcommand("convert", "luminance-convert, crop and resample rasters");
  common(convert);
  convert->add_option("inputs", o.inputs,
                      "input files (.ras .png .pgm .ppm); join three single-band files with '+' for RGB");
  convert->add_flag("--crop", o.crop, "crop a square window");
  convert->add_option("--side-m", o.side_m, "crop side in meters (default 800)");
  convert->add_option("--center-lon", o.center_lon, "crop center longitude (default: raster center)");
  convert->add_option("--center-lat", o.center_lat, "crop center latitude (default: raster center)");
  convert->add_flag("--resample", o.resample, "bilinear resample to --size");
  convert->add_option("--size", o.resample_dims, "resample target HxW (default 516x426)");
  convert->add_option("--origin-lon", o.origin_lon, "top-left longitude for imported images");
  convert->add_option("--origin-lat", o.origin_lat, "top-left latitude for imported images");
  convert->add_option("--pixel-size-m", o.pixel_size_m, "ground sample distance for imported images");
  convert->add_option("--acquired", o.acquired, "acquisition date for imported images (YYYY-MM-DD)");

  auto* label = app.add_subcommand("label", "attach structural-area and NTL labels to a catalog");
  common(label);
  catalog(label);
  label->add_option("--side-m", o.side_m, "footprint side in meters (default 800)");
  label->add_flag("--sample-sd", o.sample_sd, "report the n-1 standard deviation");

  auto* eval = app.add_subcommand("eval", "AP at IoU thresholds, overall and per year");
  common(eval);
  eval->add_option("--pairs", o.pairs, "CSV with columns pred,truth,year");
  eval->add_option("--thresholds", o.thresholds, "IoU thresholds")->delimiter(',');
  eval->add_option("--min-group", o.min_group_images, "flag years with fewer images (default 9)");

  auto* split = app.add_subcommand("split", "site-atomic train/validation/test split");
  common(split);
  catalog(split);
  split->add_option("--seed", o.seed, "shuffle seed");
  split->add_option("--fractions", o.fractions, "train,validation,test")->delimiter(',');

  auto* bundle = app.add_subcommand("bundle", "export resampled model inputs with checksums");
  common(bundle);
  catalog(bundle);
  bundle->add_option("--splits", o.splits, "splits.json from the split command");
  bundle->add_option("--partition", o.partition, "train | validation | test | all");
  bundle->add_option("--size", o.resample_dims, "target HxW (default 516x426)");
  bundle->add_option("--verify", o.verify, "verify an existing bundle directory");

  auto* trend = app.add_subcommand("trend", "yearly means, percent change, site change, bridge fit");
  common(trend);
  catalog(trend);
  trend->add_option("--value", o.value, "area | ntl");
  trend->add_option("--ci-level", o.ci_level, "confidence level (default 0.95)");
  trend->add_option("--predictions", o.predictions, "CSV site_id,acquired,value to score with L1");

  auto* synth = app.add_subcommand("synth", "write a synthetic catalog with known ground truth");
  common(synth);
  synth->add_option("--seed", o.seed, "generator seed");
  synth->add_option("--sites", o.synth_sites, "number of sites");
  synth->add_option("--years", o.synth_years, "observation years")->delimiter(',');
  synth->add_option("--mean-growth", o.synth_mean_growth, "mean growth, m^2/year");
  synth->add_option("--growth-sd", o.synth_growth_sd, "per-site growth sd, m^2/year");
  synth->add_option("--jitter", o.synth_jitter, "per-observation area jitter sd, m^2");
  synth->add_option("--grid", o.synth_grid, "scene size in pixels");
  synth->add_option("--side-m", o.side_m, "scene side in meters (default 800)");

  auto* rep = app.add_subcommand("report", "corpus statistics");
  common(rep);
  catalog(rep);
  rep->add_option("--splits", o.splits, "optional splits.json");
  rep->add_flag("--sample-sd", o.sample_sd, "report the n-1 standard deviation");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig c = resolve(o);
    using namespace sitedev::cli;
    if (*convert) return cmd_convert(c, std::cerr);
    if (*label) return cmd_label(c, std::cout, std::cerr);
    if (*eval) return cmd_eval(c, std::cout, std::cerr);
    if (*split) return cmd_split(c, std::cout, std::cerr);
    if (*bundle) return cmd_bundle(c, std::cout, std::cerr);
    if (*trend) return cmd_trend(c, std::cout, std::cerr);
    if (*synth) return cmd_synth(c, std::cout, std::cerr);
    if (*rep) return cmd_report(c, std::cout, std::cerr);
  } catch (const sitedev::Error& e) {
    std::cerr << "error (" << sitedev::to_string(e.kind()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
