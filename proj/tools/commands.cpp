#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "sitedev/analytics.hpp"
#include "sitedev/dataset.hpp"
#include "sitedev/error.hpp"
#include "sitedev/masks.hpp"
#include "sitedev/ntl.hpp"
#include "sitedev/parallel.hpp"
#include "sitedev/raster.hpp"
#include "sitedev/report.hpp"
#include "sitedev/synth.hpp"

namespace sitedev::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using report::format_number;

json to_json(const RunConfig& c) {
  json j = {
      {"catalog", c.catalog},
      {"out", c.out},
      {"pairs", c.pairs},
      {"splits", c.splits},
      {"predictions", c.predictions},
      {"inputs", c.inputs},
      {"side_m", c.side_m},
      {"resample_h", c.resample_h},
      {"resample_w", c.resample_w},
      {"crop", c.crop},
      {"resample", c.resample},
      {"origin_lon", c.origin_lon},
      {"origin_lat", c.origin_lat},
      {"pixel_size_m", c.pixel_size_m},
      {"acquired", c.acquired},
      {"thresholds", c.thresholds},
      {"min_group_images", c.min_group_images},
      {"fractions", c.fractions},
      {"seed", c.seed},
      {"partition", c.partition},
      {"verify", c.verify},
      {"ci_level", c.ci_level},
      {"value", c.value},
      {"sample_sd", c.sample_sd},
      {"synth_sites", c.synth_sites},
      {"synth_years", c.synth_years},
      {"synth_mean_growth", c.synth_mean_growth},
      {"synth_growth_sd", c.synth_growth_sd},
      {"synth_jitter", c.synth_jitter},
      {"synth_grid", c.synth_grid},
      {"jobs", c.jobs},
  };
  j["center_lon"] = c.center_lon ? json(*c.center_lon) : json(nullptr);
  j["center_lat"] = c.center_lat ? json(*c.center_lat) : json(nullptr);
  return j;
}

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw Error(ErrorKind::Validation, "config must be a JSON object");
  try {
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    take("catalog", c.catalog);
    take("out", c.out);
    take("pairs", c.pairs);
    take("splits", c.splits);
    take("predictions", c.predictions);
    take("inputs", c.inputs);
    take("side_m", c.side_m);
    take("resample_h", c.resample_h);
    take("resample_w", c.resample_w);
    take("crop", c.crop);
    take("resample", c.resample);
    take("origin_lon", c.origin_lon);
    take("origin_lat", c.origin_lat);
    take("pixel_size_m", c.pixel_size_m);
    take("acquired", c.acquired);
    take("thresholds", c.thresholds);
    take("min_group_images", c.min_group_images);
    take("fractions", c.fractions);
    take("seed", c.seed);
    take("partition", c.partition);
    take("verify", c.verify);
    take("ci_level", c.ci_level);
    take("value", c.value);
    take("sample_sd", c.sample_sd);
    take("synth_sites", c.synth_sites);
    take("synth_years", c.synth_years);
    take("synth_mean_growth", c.synth_mean_growth);
    take("synth_growth_sd", c.synth_growth_sd);
    take("synth_jitter", c.synth_jitter);
    take("synth_grid", c.synth_grid);
    take("jobs", c.jobs);
    for (auto [key, field] : {std::pair{"center_lon", &c.center_lon}, {"center_lat", &c.center_lat}})
      if (j.contains(key)) {
        if (j.at(key).is_null())
          field->reset();
        else
          *field = j.at(key).get<double>();
      }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Validation, std::string("invalid config: ") + e.what());
  }
  return c;
}

void echo_config(const std::string& command, const RunConfig& c) {
  const json j = {{"command", command}, {"tool_version", kToolVersion}, {"config", to_json(c)}};
  dataset::write_file_atomic(fs::path(c.out) / "run_config.json", j.dump(2) + "\n");
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  dataset::write_file_atomic(path, text);
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

dataset::Catalog require_catalog(const RunConfig& c) {
  if (c.catalog.empty()) throw Error(ErrorKind::Validation, "--catalog is required");
  return dataset::load_catalog(c.catalog);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::string& header) {
  std::istringstream in(dataset::read_file(path));
  std::string line;
  if (!std::getline(in, line) || (line.erase(line.find_last_not_of('\r') + 1), line != header))
    throw Error(ErrorKind::Validation, path.string() + ": header must be '" + header + "'");
  std::vector<std::vector<std::string>> rows;
  const auto columns = split_on(header, ',').size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_on(line, ',');
    if (fields.size() != columns)
      throw Error(ErrorKind::Validation, path.string() + ": line " + std::to_string(line_no) +
                                             ": expected " + std::to_string(columns) + " fields");
    rows.push_back(std::move(fields));
  }
  return rows;
}

struct Failure {
  std::string item;
  std::string reason;
};

}  // namespace

// ---------------------------------------------------------------------------

int cmd_convert(const RunConfig& c, std::ostream& log) {
  if (c.inputs.empty()) throw Error(ErrorKind::Validation, "convert needs at least one input");
  fs::create_directories(c.out);
  echo_config("convert", c);

  RasterGrid::Meta meta;
  meta.acquired = Date::parse(c.acquired);
  meta.transform.origin_lon = c.origin_lon;
  meta.transform.origin_lat = c.origin_lat;
  meta.transform.pixel_size_x_m = meta.transform.pixel_size_y_m = c.pixel_size_m;
  meta.transform.crs = CrsTag::LocalMeters;
  meta.transform.anchor_lat = c.origin_lat;

  const std::size_t n = c.inputs.size();
  std::vector<std::string> lines(n);
  std::vector<bool> ok(n, false);
  parallel_for(n, c.jobs, [&](std::size_t i) {
    const std::string& spec = c.inputs[i];
    const auto parts = split_on(spec, '+');
    const fs::path dest = fs::path(c.out) / (fs::path(parts[0]).stem().string() + ".ras");
    try {
      std::optional<RasterGrid> grid;
      std::string how;
      if (parts.size() == 3) {
        std::vector<RasterGrid> ch;
        for (const auto& p : parts) {
          auto img = import_image(p, meta);
          if (img.channels.size() != 1)
            throw Error(ErrorKind::Load, p + ": RGB triple members must be single-band");
          ch.push_back(std::move(img.channels[0]));
        }
        grid = rgb_to_luminance(ch[0], ch[1], ch[2]);
        how = "luminance";
      } else if (parts.size() == 1) {
        auto img = import_image(parts[0], meta);
        if (img.channels.size() == 3) {
          grid = rgb_to_luminance(img.channels[0], img.channels[1], img.channels[2]);
          how = "luminance";
        } else {
          grid = std::move(img.channels[0]);
          how = "pass-through";
        }
      } else {
        throw Error(ErrorKind::Validation, "RGB input must be three paths joined by '+'");
      }
      if (c.crop) {
        double lon, lat;
        grid->center(lon, lat);
        grid = crop_window(*grid, c.center_lon.value_or(lon), c.center_lat.value_or(lat), c.side_m);
        how += "+crop";
      }
      if (c.resample) {
        grid = resample_bilinear(*grid, c.resample_h, c.resample_w);
        how += "+resample";
      }
      save_raster(*grid, dest);
      ok[i] = true;
      lines[i] = "convert " + spec + " -> " + dest.string() + " (" + how + ", " +
                 std::to_string(grid->height()) + "x" + std::to_string(grid->width()) + ")";
    } catch (const std::exception& e) {
      lines[i] = "convert " + spec + " FAILED: " + e.what();
    }
  });
  for (const auto& l : lines) log << l << '\n';
  const auto good = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), true));
  log << "convert: " << good << "/" << n << " succeeded\n";
  if (good == n) return 0;
  return good == 0 ? 1 : 2;
}

// ---------------------------------------------------------------------------

int cmd_label(const RunConfig& c, std::ostream& out, std::ostream& log) {
  dataset::Catalog catalog = require_catalog(c);
  fs::create_directories(c.out);
  echo_config("label", c);

  dataset::LabelOptions opts;
  opts.side_m = c.side_m;
  opts.jobs = c.jobs;
  auto result = dataset::attach_labels(catalog.observations, catalog.sites, c.catalog, opts);
  for (const auto& w : result.warnings) log << "warning: " << w << '\n';
  catalog.observations = std::move(result.observations);
  dataset::save_catalog(catalog, c.catalog);

  const auto convention = c.sample_sd ? analytics::SdConvention::Sample
                                      : analytics::SdConvention::Population;
  std::ostringstream csv;
  csv << "label,mean,sd,n,sd_convention\n";
  for (const char* which : {"area_m2", "ntl"}) {
    std::vector<double> values;
    for (const auto& o : catalog.observations) {
      const auto& v = std::string_view(which) == "area_m2" ? o.area_label_m2 : o.ntl_label;
      if (v) values.push_back(*v);
    }
    if (values.empty()) {
      out << which << ": no labels\n";
      continue;
    }
    const auto s = analytics::dataset_summary(values, convention);
    csv << which << ',' << format_number(s.mean) << ',' << format_number(s.sd) << ',' << s.count
        << ',' << (c.sample_sd ? "sample" : "population") << '\n';
    out << which << ": mean " << format_number(s.mean) << ", sd " << format_number(s.sd)
        << ", n " << s.count << '\n';
  }
  write_text(fs::path(c.out) / "label_summary.csv", csv.str());
  log << "label: " << catalog.observations.size() << " observations labeled, "
      << result.warnings.size() << " warnings\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_eval(const RunConfig& c, std::ostream& out, std::ostream& log) {
  if (c.pairs.empty()) throw Error(ErrorKind::Validation, "--pairs is required");
  if (c.thresholds.empty()) throw Error(ErrorKind::Validation, "at least one threshold is required");
  fs::create_directories(c.out);
  echo_config("eval", c);

  const fs::path base = fs::path(c.pairs).parent_path();
  const auto rows = read_csv(c.pairs, "pred,truth,year");
  std::vector<std::optional<EvalImage>> images(rows.size());
  std::vector<std::string> errors(rows.size());
  parallel_for(rows.size(), c.jobs, [&](std::size_t i) {
    try {
      images[i] = EvalImage{load_masks(base / rows[i][0]), load_masks(base / rows[i][1]),
                            std::stoi(rows[i][2])};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<EvalImage> dataset;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!images[i]) {
      ++failures;
      log << "eval " << rows[i][0] << " FAILED: " << errors[i] << '\n';
      continue;
    }
    if (images[i]->predictions.empty())
      log << "eval " << rows[i][0] << ": no predictions, AP undefined for this image\n";
    dataset.push_back(std::move(*images[i]));
  }

  std::vector<report::ApTableRow> table;
  for (double t : c.thresholds) {
    ApRow pooled;
    pooled.images = dataset.size();
    for (const auto& img : dataset) {
      const auto counts = count_detections(img.predictions, img.truths, t);
      pooled.counts.true_positives += counts.true_positives;
      pooled.counts.false_positives += counts.false_positives;
    }
    const auto total = pooled.counts.true_positives + pooled.counts.false_positives;
    if (total == 0) {
      pooled.flag = ApFlag::Undefined;
    } else {
      pooled.ap = static_cast<double>(pooled.counts.true_positives) / static_cast<double>(total);
    }
    table.push_back({t, "all", pooled});
    for (const ApRow& r : ap_grouped(dataset, t, c.min_group_images))
      table.push_back({t, std::to_string(r.year), r});
  }
  const std::string csv = report::ap_csv(table);
  write_text(fs::path(c.out) / "ap.csv", csv);
  out << csv;
  return failures == 0 ? 0 : (dataset.empty() ? 1 : 2);
}

// ---------------------------------------------------------------------------

namespace {

dataset::SplitFractions fractions_of(const RunConfig& c) {
  if (c.fractions.size() != 3)
    throw Error(ErrorKind::Validation, "fractions must list train,validation,test");
  return {c.fractions[0], c.fractions[1], c.fractions[2]};
}

}  // namespace

int cmd_split(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const dataset::Catalog catalog = require_catalog(c);
  fs::create_directories(c.out);
  echo_config("split", c);

  const auto sites = dataset::images_per_site(catalog);
  const auto fractions = fractions_of(c);
  const auto split = dataset::split_by_site(sites, fractions, c.seed);
  write_text(fs::path(c.out) / "splits.json", dataset::splits_to_json(split));

  std::size_t n_sites[3] = {}, n_images[3] = {}, total = 0;
  for (const auto& s : sites) {
    const auto p = static_cast<int>(split.partition_of.at(s.site_id));
    ++n_sites[p];
    n_images[p] += s.images;
    total += s.images;
  }
  const double f[3] = {fractions.train, fractions.validation, fractions.test};
  std::ostringstream csv;
  csv << "partition,sites,images,target_images\n";
  for (int p = 0; p < 3; ++p)
    csv << dataset::to_string(static_cast<dataset::Partition>(p)) << ',' << n_sites[p] << ','
        << n_images[p] << ',' << format_number(f[p] * static_cast<double>(total)) << '\n';
  write_text(fs::path(c.out) / "split_counts.csv", csv.str());
  out << csv.str();
  log << "split: " << sites.size() << " sites assigned with seed " << c.seed << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_bundle(const RunConfig& c, std::ostream& out, std::ostream& log) {
  if (!c.verify.empty()) {
    dataset::verify_bundle(c.verify);
    out << "bundle " << c.verify << ": all checksums verified\n";
    return 0;
  }
  const dataset::Catalog catalog = require_catalog(c);
  std::vector<dataset::Observation> selected;
  if (c.partition == "all") {
    selected = catalog.observations;
  } else {
    if (c.splits.empty()) throw Error(ErrorKind::Validation, "--splits is required for a partition");
    const auto split = dataset::parse_splits_json(dataset::read_file(c.splits));
    const auto want = dataset::parse_partition(c.partition);
    for (const auto& o : catalog.observations) {
      const auto it = split.partition_of.find(o.site_id);
      if (it == split.partition_of.end())
        throw Error(ErrorKind::Validation, "site " + o.site_id + " missing from splits");
      if (it->second == want) selected.push_back(o);
    }
  }
  fs::create_directories(c.out);
  echo_config("bundle", c);
  const auto m = dataset::export_training_bundle(selected, c.catalog, {c.resample_h, c.resample_w},
                                                 c.out, c.jobs);
  out << "bundle: " << m.batches.size() << " batches, " << selected.size() << " observations, "
      << m.target_h << "x" << m.target_w << '\n';
  log << "bundle written to " << c.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_trend(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const dataset::Catalog catalog = require_catalog(c);
  if (c.value != "area" && c.value != "ntl")
    throw Error(ErrorKind::Validation, "--value must be area or ntl");
  fs::create_directories(c.out);
  echo_config("trend", c);
  const fs::path dir(c.out);

  auto value_of = [&](const dataset::Observation& o) {
    return c.value == "area" ? o.area_label_m2 : o.ntl_label;
  };

  std::vector<analytics::YearValue> points;
  std::map<std::string, std::vector<analytics::DatedValue>> per_site;
  for (const auto& o : catalog.observations)
    if (const auto v = value_of(o)) {
      points.push_back({o.acquired.year, *v});
      per_site[o.site_id].push_back({o.acquired, *v});
    }
  const auto trend = analytics::yearly_trend(points, c.ci_level);
  write_text(dir / "trend.csv", report::trend_csv(trend));
  write_text(dir / "trend.svg",
             report::trend_svg(trend, c.value == "area" ? "Mean structural area by year"
                                                        : "Mean NTL radiance by year",
                               c.value == "area" ? "area (m^2)" : "radiance (nW/cm^2/sr)"));

  std::vector<report::SiteDelta> deltas;
  std::vector<double> changes;
  for (auto& [site, series] : per_site) {
    if (series.size() < 2) continue;
    std::sort(series.begin(), series.end(),
              [](const auto& a, const auto& b) { return a.date < b.date; });
    const double d = analytics::site_change(series);
    deltas.push_back({site, series.front().date, series.back().date, series.size(),
                      series.front().value, series.back().value, d});
    changes.push_back(d);
  }
  write_text(dir / "site_change.csv", report::site_change_csv(deltas));

  std::ostringstream summary;
  summary << "metric,value\n";
  summary << "slope," << format_number(trend.fit.slope) << '\n';
  summary << "intercept," << format_number(trend.fit.intercept) << '\n';
  summary << "r_squared," << format_number(trend.fit.r_squared) << '\n';
  summary << "pct_per_year," << format_number(trend.pct_change_per_year) << '\n';
  summary << "pct_total," << format_number(trend.pct_change_total) << '\n';
  if (!changes.empty()) {
    // Sample sd: the standard error of the fleet mean is derived from it.
    const auto s = analytics::dataset_summary(
        changes, changes.size() > 1 ? analytics::SdConvention::Sample
                                    : analytics::SdConvention::Population);
    summary << "site_change_sites," << s.count << '\n';
    summary << "site_change_mean," << format_number(s.mean) << '\n';
    summary << "site_change_sd," << format_number(s.sd) << '\n';
    const auto growing = std::count_if(changes.begin(), changes.end(), [](double d) { return d > 0; });
    summary << "site_change_positive," << growing << '\n';
  }

  // Bridge model: area against NTL where both labels exist.
  std::vector<analytics::Point> bridge;
  for (const auto& o : catalog.observations)
    if (o.area_label_m2 && o.ntl_label) bridge.push_back({*o.ntl_label, *o.area_label_m2});
  try {
    if (bridge.size() >= 2) {
      const auto fit = analytics::ols_fit(bridge);
      write_text(dir / "bridge_fit.csv",
                 "slope,intercept,r_squared,n\n" + format_number(fit.slope) + ',' +
                     format_number(fit.intercept) + ',' + format_number(fit.r_squared) + ',' +
                     std::to_string(fit.n) + '\n');
      summary << "bridge_slope," << format_number(fit.slope) << '\n';
      summary << "bridge_intercept," << format_number(fit.intercept) << '\n';
      summary << "bridge_r_squared," << format_number(fit.r_squared) << '\n';
    }
  } catch (const Error& e) {
    log << "trend: bridge fit skipped: " << e.what() << '\n';
  }

  // External predictions scored against the catalog labels.
  if (!c.predictions.empty()) {
    std::map<std::pair<std::string, std::string>, double> labels;
    for (const auto& o : catalog.observations)
      if (const auto v = value_of(o)) labels[{o.site_id, o.acquired.to_string()}] = *v;
    std::vector<double> preds, truth;
    std::vector<analytics::YearValue> pred_points;
    std::size_t unmatched = 0;
    for (const auto& row : read_csv(c.predictions, "site_id,acquired,value")) {
      const auto it = labels.find({row[0], row[1]});
      const double v = std::stod(row[2]);
      pred_points.push_back({Date::parse(row[1]).year, v});
      if (it == labels.end()) {
        ++unmatched;
        continue;
      }
      preds.push_back(v);
      truth.push_back(it->second);
    }
    if (unmatched) log << "trend: " << unmatched << " predictions have no matching label\n";
    const double l1 = analytics::l1_score(preds, truth);
    write_text(dir / "l1.csv", "n,l1\n" + std::to_string(preds.size()) + ',' + format_number(l1) + '\n');
    summary << "l1," << format_number(l1) << '\n';
    const auto pred_trend = analytics::yearly_trend(pred_points, c.ci_level);
    write_text(dir / "trend_predictions.csv", report::trend_csv(pred_trend));
  }

  write_text(dir / "trend_summary.csv", summary.str());
  out << summary.str();
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_synth(const RunConfig& c, std::ostream& out, std::ostream& log) {
  synth::FleetSpec spec;
  spec.sites = c.synth_sites;
  spec.years = c.synth_years;
  spec.mean_growth_m2_per_year = c.synth_mean_growth;
  spec.growth_sd_m2_per_year = c.synth_growth_sd;
  spec.jitter_sd_m2 = c.synth_jitter;
  spec.seed = c.seed;
  spec.scene.grid_h = spec.scene.grid_w = c.synth_grid;
  spec.scene.pixel_size_m = c.side_m / static_cast<double>(c.synth_grid);
  fs::create_directories(c.out);
  echo_config("synth", c);
  const auto truth = synth::write_synthetic_catalog(spec, c.out, c.jobs);
  out << "synth: " << truth.sites.size() << " sites, mean injected change "
      << format_number(truth.mean_injected_change()) << " m2\n";
  log << "synth catalog written to " << c.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_report(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const dataset::Catalog catalog = require_catalog(c);
  fs::create_directories(c.out);
  echo_config("report", c);

  std::ostringstream csv;
  csv << "metric,value\n";
  csv << "sites," << catalog.sites.size() << '\n';
  csv << "observations," << catalog.observations.size() << '\n';
  std::map<dataset::SiteClass, std::size_t> classes;
  for (const auto& s : catalog.sites) ++classes[s.site_class];
  for (auto k : {dataset::SiteClass::Factory, dataset::SiteClass::PowerStation, dataset::SiteClass::Port})
    csv << "sites_" << dataset::to_string(k) << ',' << classes[k] << '\n';

  auto per_site = dataset::images_per_site(catalog);
  std::vector<double> counts;
  for (const auto& s : per_site) counts.push_back(static_cast<double>(s.images));
  if (!counts.empty()) {
    std::sort(counts.begin(), counts.end());
    const std::size_t m = counts.size();
    const double median = m % 2 ? counts[m / 2] : 0.5 * (counts[m / 2 - 1] + counts[m / 2]);
    csv << "observations_per_site_median," << format_number(median) << '\n';
  }
  std::size_t eligible = 0;
  std::vector<double> areas, ntls;
  for (const auto& o : catalog.observations) {
    if (o.acquired >= ntl::kFirstEligibleDate) ++eligible;
    if (o.area_label_m2) areas.push_back(*o.area_label_m2);
    if (o.ntl_label) ntls.push_back(*o.ntl_label);
  }
  csv << "ntl_eligible_observations," << eligible << '\n';
  const auto conv = c.sample_sd ? analytics::SdConvention::Sample : analytics::SdConvention::Population;
  for (auto [name, values] : {std::pair{"area_m2", &areas}, {"ntl", &ntls}})
    if (!values->empty()) {
      const auto s = analytics::dataset_summary(*values, conv);
      csv << name << "_mean," << format_number(s.mean) << '\n';
      csv << name << "_sd," << format_number(s.sd) << '\n';
      csv << name << "_n," << s.count << '\n';
    }
  if (!c.splits.empty()) {
    const auto split = dataset::parse_splits_json(dataset::read_file(c.splits));
    std::size_t images[3] = {};
    for (const auto& s : per_site) {
      const auto it = split.partition_of.find(s.site_id);
      if (it != split.partition_of.end()) images[static_cast<int>(it->second)] += s.images;
    }
    for (int p = 0; p < 3; ++p)
      csv << "images_" << dataset::to_string(static_cast<dataset::Partition>(p)) << ','
          << images[p] << '\n';
  }
  write_text(fs::path(c.out) / "summary.csv", csv.str());
  out << csv.str();
  log << "report written to " << c.out << '\n';
  return 0;
}

}  // namespace sitedev::cli
