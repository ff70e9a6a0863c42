#include "sitedev/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "sitedev/checksum.hpp"
#include "sitedev/error.hpp"
#include "sitedev/masks.hpp"
#include "sitedev/ntl.hpp"
#include "sitedev/parallel.hpp"
#include "sitedev/random.hpp"
#include "sitedev/report.hpp"

namespace sitedev::dataset {

using nlohmann::json;

std::string_view to_string(SiteClass c) {
  switch (c) {
    case SiteClass::Factory: return "factory";
    case SiteClass::PowerStation: return "power_station";
    case SiteClass::Port: return "port";
  }
  return "factory";
}

SiteClass parse_site_class(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) {
    return c == ' ' ? '_' : static_cast<char>(std::tolower(c));
  });
  if (t == "factory") return SiteClass::Factory;
  if (t == "power_station") return SiteClass::PowerStation;
  if (t == "port") return SiteClass::Port;
  throw Error(ErrorKind::Validation, "invalid class '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Sites CSV

namespace {

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted)
    throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

double parse_double(const std::string& text, std::size_t line_no, const char* field) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty() || !std::isfinite(v))
    throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) + ": field '" + field +
                                           "' is not a number: '" + text + "'");
  return v;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

}  // namespace

std::vector<Site> parse_sites_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "id,name,lon,lat,class")
    throw Error(ErrorKind::Validation, "line 1: header must be 'id,name,lon,lat,class'");
  std::vector<Site> sites;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) continue;
    const auto f = split_csv_line(lines[i], line_no);
    if (f.size() != 5)
      throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) + ": expected 5 fields, got " +
                                             std::to_string(f.size()));
    Site s;
    s.id = f[0];
    if (s.id.empty())
      throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) + ": field 'id' is empty");
    s.name = f[1];
    s.lon = parse_double(f[2], line_no, "lon");
    s.lat = parse_double(f[3], line_no, "lat");
    if (s.lon < -180.0 || s.lon > 180.0)
      throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) +
                                             ": field 'lon' outside [-180, 180]");
    if (s.lat < -90.0 || s.lat > 90.0)
      throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) +
                                             ": field 'lat' outside [-90, 90]");
    try {
      s.site_class = parse_site_class(f[4]);
    } catch (const Error& e) {
      throw Error(ErrorKind::Validation,
                  "line " + std::to_string(line_no) + ": field 'class': " + e.what());
    }
    if (!seen.insert(s.id).second)
      throw Error(ErrorKind::Validation,
                  "line " + std::to_string(line_no) + ": duplicate site id '" + s.id + "'");
    sites.push_back(std::move(s));
  }
  return sites;
}

std::vector<Site> ingest_catalog(const std::filesystem::path& path) {
  try {
    return parse_sites_csv(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string sites_to_csv(std::span<const Site> sites) {
  std::ostringstream out;
  out << "id,name,lon,lat,class\n";
  for (const Site& s : sites)
    out << report::csv_field(s.id) << ',' << report::csv_field(s.name) << ','
        << report::format_number(s.lon) << ',' << report::format_number(s.lat) << ','
        << to_string(s.site_class) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Observations

void validate(const Observation& o) {
  if (o.site_id.empty()) throw Error(ErrorKind::Validation, "observation without site_id");
  if (!o.acquired.valid()) throw Error(ErrorKind::Validation, "observation with invalid date");
  auto check = [&](const std::optional<double>& v, const char* name) {
    if (v && (!std::isfinite(*v) || *v < 0.0))
      throw Error(ErrorKind::Validation, std::string(name) + " must be finite and non-negative");
  };
  check(o.area_label_m2, "area_label_m2");
  check(o.ntl_label, "ntl_label");
  if (o.ntl_label && !ntl::eligible(o.acquired))
    throw Error(ErrorKind::Validation, "ntl_label on an observation acquired before 2012-04");
  if (!(o.resolution_m > 0.0) || !std::isfinite(o.resolution_m))
    throw Error(ErrorKind::Validation, "resolution_m must be positive");
}

std::string observation_to_json_line(const Observation& o) {
  json j = {{"schema_version", kSchemaVersion},
            {"site_id", o.site_id},
            {"acquired", o.acquired.to_string()},
            {"raster_ref", o.raster_ref},
            {"resolution_m", o.resolution_m}};
  if (o.masks_ref) j["masks_ref"] = *o.masks_ref;
  if (o.ntl_ref) j["ntl_ref"] = *o.ntl_ref;
  if (o.ntl_period) j["ntl_period"] = o.ntl_period->to_string();
  if (o.area_label_m2) j["area_label_m2"] = *o.area_label_m2;
  if (o.ntl_label) j["ntl_label"] = *o.ntl_label;
  if (o.ntl_cell) j["ntl_cell"] = *o.ntl_cell;
  return j.dump();
}

Observation parse_observation_json(std::string_view line) {
  Observation o;
  try {
    const json j = json::parse(line);
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      throw Error(ErrorKind::Load, "unsupported observation schema_version");
    o.site_id = j.at("site_id").get<std::string>();
    o.acquired = Date::parse(j.at("acquired").get<std::string>());
    o.raster_ref = j.at("raster_ref").get<std::string>();
    o.resolution_m = j.at("resolution_m").get<double>();
    if (j.contains("masks_ref")) o.masks_ref = j["masks_ref"].get<std::string>();
    if (j.contains("ntl_ref")) o.ntl_ref = j["ntl_ref"].get<std::string>();
    if (j.contains("ntl_period")) o.ntl_period = YearMonth::parse(j["ntl_period"].get<std::string>());
    if (j.contains("area_label_m2")) o.area_label_m2 = j["area_label_m2"].get<double>();
    if (j.contains("ntl_label")) o.ntl_label = j["ntl_label"].get<double>();
    if (j.contains("ntl_cell")) o.ntl_cell = j["ntl_cell"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Load, std::string("malformed observation: ") + e.what());
  }
  validate(o);
  return o;
}

const Site* Catalog::find_site(std::string_view id) const {
  for (const Site& s : sites)
    if (s.id == id) return &s;
  return nullptr;
}

Catalog load_catalog(const std::filesystem::path& dir) {
  Catalog c;
  c.sites = ingest_catalog(dir / "sites.csv");
  std::set<std::string_view> ids;
  for (const Site& s : c.sites) ids.insert(s.id);
  const auto path = dir / "observations.jsonl";
  const std::string text = read_file(path);
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      Observation o = parse_observation_json(lines[i]);
      if (!ids.count(o.site_id))
        throw Error(ErrorKind::Validation, "unknown site_id '" + o.site_id + "'");
      c.observations.push_back(std::move(o));
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ": line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return c;
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& dir) {
  std::string obs;
  for (const Observation& o : catalog.observations) obs += observation_to_json_line(o) + '\n';
  write_file_atomic(dir / "sites.csv", sites_to_csv(catalog.sites));
  write_file_atomic(dir / "observations.jsonl", obs);
}

// ---------------------------------------------------------------------------
// Labels

LabelResult attach_labels(std::span<const Observation> observations, std::span<const Site> sites,
                          const std::filesystem::path& base_dir, const LabelOptions& options) {
  std::unordered_map<std::string_view, const Site*> by_id;
  for (const Site& s : sites) by_id[s.id] = &s;
  const double extent = options.extent_m2.value_or(options.side_m * options.side_m);

  const std::size_t n = observations.size();
  std::vector<Observation> out(observations.begin(), observations.end());
  std::vector<std::vector<std::string>> warnings(n);

  parallel_for(n, options.jobs, [&](std::size_t i) {
    Observation& o = out[i];
    const std::string tag = o.site_id + " " + o.acquired.to_string();
    if (o.masks_ref) {
      const MaskSet masks = load_masks(base_dir / *o.masks_ref);
      o.area_label_m2 = structural_area(masks, extent);
    }
    if (o.ntl_ref) {
      o.ntl_label.reset();
      o.ntl_cell.reset();
      if (!ntl::eligible(o.acquired)) {
        warnings[i].push_back(tag + ": acquired before 2012-04; NTL label skipped");
        return;
      }
      const auto site = by_id.find(o.site_id);
      if (site == by_id.end())
        throw Error(ErrorKind::Validation, tag + ": unknown site_id");
      const ntl::NtlGrid grid(load_raster(base_dir / *o.ntl_ref));
      if (o.ntl_period && *o.ntl_period != grid.period())
        warnings[i].push_back(tag + ": ntl_period " + o.ntl_period->to_string() +
                              " replaced by grid period " + grid.period().to_string());
      o.ntl_period = grid.period();
      try {
        const auto label =
            ntl::ntl_label(grid, {site->second->lon, site->second->lat, options.side_m});
        o.ntl_label = label.radiance;
        o.ntl_cell = label.cell;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoLabel) throw;
        warnings[i].push_back(tag + ": " + e.what());
      }
    }
  });

  LabelResult result{std::move(out), {}};
  for (auto& w : warnings)
    for (auto& line : w) result.warnings.push_back(std::move(line));
  return result;
}

// ---------------------------------------------------------------------------
// Splits

std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::Train: return "train";
    case Partition::Validation: return "validation";
    case Partition::Test: return "test";
  }
  return "train";
}

Partition parse_partition(std::string_view text) {
  if (text == "train") return Partition::Train;
  if (text == "validation") return Partition::Validation;
  if (text == "test") return Partition::Test;
  throw Error(ErrorKind::Load, "unknown partition '" + std::string(text) + "'");
}

SplitAssignment split_by_site(std::span<const SiteImages> sites, const SplitFractions& fractions,
                              std::uint64_t seed) {
  const double f[3] = {fractions.train, fractions.validation, fractions.test};
  for (double x : f)
    if (!(x > 0.0)) throw Error(ErrorKind::Validation, "split fractions must be positive");
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9)
    throw Error(ErrorKind::Validation, "split fractions must sum to 1");
  if (sites.size() < 3) throw Error(ErrorKind::Validation, "a three-way split needs at least 3 sites");

  std::vector<const SiteImages*> order;
  std::set<std::string_view> ids;
  std::size_t total = 0;
  for (const SiteImages& s : sites) {
    if (!ids.insert(s.site_id).second)
      throw Error(ErrorKind::Validation, "duplicate site id '" + s.site_id + "'");
    order.push_back(&s);
    total += s.images;
  }
  Rng rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(i + 1)]);

  SplitAssignment out;
  out.seed = seed;
  out.fractions = fractions;
  double deficit[3];
  for (int p = 0; p < 3; ++p) deficit[p] = f[p] * static_cast<double>(total);
  for (const SiteImages* s : order) {
    int best = 0;
    for (int p = 1; p < 3; ++p)
      if (deficit[p] > deficit[best]) best = p;
    deficit[best] -= static_cast<double>(s->images);
    out.partition_of[s->site_id] = static_cast<Partition>(best);
  }
  return out;
}

std::vector<SiteImages> images_per_site(const Catalog& catalog) {
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const Observation& o : catalog.observations) ++counts[o.site_id];
  std::vector<SiteImages> out;
  for (const Site& s : catalog.sites) out.push_back({s.id, counts[s.id]});
  return out;
}

std::string splits_to_json(const SplitAssignment& s) {
  json assignments = json::array();
  for (const auto& [id, p] : s.partition_of)
    assignments.push_back({{"site_id", id}, {"partition", to_string(p)}});
  const json j = {{"schema_version", kSchemaVersion},
                  {"seed", s.seed},
                  {"fractions",
                   {{"train", s.fractions.train},
                    {"validation", s.fractions.validation},
                    {"test", s.fractions.test}}},
                  {"assignments", assignments}};
  return j.dump(2) + '\n';
}

SplitAssignment parse_splits_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      throw Error(ErrorKind::Load, "unsupported splits schema_version");
    SplitAssignment s;
    s.seed = j.at("seed").get<std::uint64_t>();
    const json& f = j.at("fractions");
    s.fractions = {f.at("train").get<double>(), f.at("validation").get<double>(),
                   f.at("test").get<double>()};
    for (const json& a : j.at("assignments"))
      s.partition_of[a.at("site_id").get<std::string>()] =
          parse_partition(a.at("partition").get<std::string>());
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Load, std::string("malformed splits file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Batches and bundles

std::vector<Batch> batch_by_site(std::span<const Observation> partition) {
  std::vector<Batch> batches;
  std::unordered_map<std::string_view, std::size_t> index;
  for (const Observation& o : partition) {
    auto [it, inserted] = index.try_emplace(o.site_id, batches.size());
    if (inserted) batches.push_back({o.site_id, {}});
    batches[it->second].observations.push_back(o);
  }
  for (Batch& b : batches)
    std::stable_sort(b.observations.begin(), b.observations.end(),
                     [](const Observation& a, const Observation& c) { return a.acquired < c.acquired; });
  return batches;
}

namespace {

std::string safe_name(std::string_view id) {
  std::string out;
  for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? report::format_number(*v) : std::string();
}

}  // namespace

BundleManifest export_training_bundle(std::span<const Observation> partition,
                                      const std::filesystem::path& base_dir,
                                      const ResampleTarget& target,
                                      const std::filesystem::path& out_dir, unsigned jobs) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "rasters");
  const auto batches = batch_by_site(partition);

  struct Item {
    const Observation* obs;
    std::string rel;
  };
  std::vector<Item> items;
  BundleManifest m;
  m.target_h = target.height;
  m.target_w = target.width;
  for (const Batch& b : batches) {
    std::vector<std::string> files;
    for (std::size_t k = 0; k < b.observations.size(); ++k) {
      const Observation& o = b.observations[k];
      std::string rel = "rasters/" + safe_name(b.site_id) + "_" + o.acquired.to_string() + "_" +
                        std::to_string(k) + ".ras";
      files.push_back(rel);
      items.push_back({&o, std::move(rel)});
    }
    m.batches.emplace_back(b.site_id, std::move(files));
  }

  std::vector<BundleFile> written(items.size());
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    const RasterGrid src = load_raster(base_dir / items[i].obs->raster_ref);
    const RasterGrid out = resample_bilinear(src, target.height, target.width);
    const auto bytes = encode_raster(out);
    const auto path = out_dir / items[i].rel;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorKind::Io, "write failed for " + path.string());
    written[i] = {items[i].rel, sha256_hex(bytes), bytes.size()};
  });

  std::ostringstream labels;
  labels << "file,site_id,acquired,area_label_m2,ntl_label\n";
  for (const Item& it : items)
    labels << it.rel << ',' << report::csv_field(it.obs->site_id) << ','
           << it.obs->acquired.to_string() << ',' << optional_number(it.obs->area_label_m2) << ','
           << optional_number(it.obs->ntl_label) << '\n';
  const std::string labels_text = labels.str();
  write_file_atomic(out_dir / "labels.csv", labels_text);

  m.files = std::move(written);
  m.files.push_back({"labels.csv", sha256_hex(labels_text), labels_text.size()});
  write_file_atomic(out_dir / "manifest.json", manifest_to_json(m));
  return m;
}

std::string manifest_to_json(const BundleManifest& m) {
  json batches = json::array();
  std::size_t observations = 0;
  for (const auto& [site, files] : m.batches) {
    batches.push_back({{"site_id", site}, {"files", files}});
    observations += files.size();
  }
  json files = json::array();
  for (const BundleFile& f : m.files)
    files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  const json j = {{"schema_version", kSchemaVersion},
                  {"target_h", m.target_h},
                  {"target_w", m.target_w},
                  {"counts", {{"batches", m.batches.size()}, {"observations", observations}}},
                  {"batches", batches},
                  {"files", files}};
  return j.dump(2) + '\n';
}

BundleManifest parse_manifest_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      throw Error(ErrorKind::Load, "unsupported manifest schema_version");
    BundleManifest m;
    m.target_h = j.at("target_h").get<std::size_t>();
    m.target_w = j.at("target_w").get<std::size_t>();
    for (const json& b : j.at("batches"))
      m.batches.emplace_back(b.at("site_id").get<std::string>(),
                             b.at("files").get<std::vector<std::string>>());
    for (const json& f : j.at("files"))
      m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                         f.at("bytes").get<std::uint64_t>()});
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Load, std::string("malformed manifest: ") + e.what());
  }
}

void verify_bundle(const std::filesystem::path& bundle_dir) {
  const BundleManifest m = parse_manifest_json(read_file(bundle_dir / "manifest.json"));
  for (const BundleFile& f : m.files) {
    const auto path = bundle_dir / f.path;
    if (!std::filesystem::exists(path))
      throw Error(ErrorKind::Checksum, "missing bundle file " + f.path);
    if (sha256_file(path) != f.sha256)
      throw Error(ErrorKind::Checksum, "checksum mismatch for " + f.path);
  }
}

}  // namespace sitedev::dataset
