#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sitedev/date.hpp"
#include "sitedev/raster.hpp"

namespace sitedev::dataset {

inline constexpr int kSchemaVersion = 1;

enum class SiteClass { Factory, PowerStation, Port };

std::string_view to_string(SiteClass c);
SiteClass parse_site_class(std::string_view text);

struct Site {
  std::string id;
  std::string name;
  double lon = 0.0;
  double lat = 0.0;
  SiteClass site_class = SiteClass::Factory;

  bool operator==(const Site&) const = default;
};

struct Observation {
  std::string site_id;
  Date acquired;
  std::string raster_ref;
  std::optional<std::string> masks_ref;
  std::optional<std::string> ntl_ref;
  std::optional<YearMonth> ntl_period;
  std::optional<double> area_label_m2;
  std::optional<double> ntl_label;
  std::optional<std::size_t> ntl_cell;
  double resolution_m = 0.5;

  bool operator==(const Observation&) const = default;
};

void validate(const Observation& o);

/// Reads a sites CSV with header id,name,lon,lat,class. Errors name the line.
std::vector<Site> ingest_catalog(const std::filesystem::path& path);
std::vector<Site> parse_sites_csv(std::string_view text);
std::string sites_to_csv(std::span<const Site> sites);

std::string observation_to_json_line(const Observation& o);
Observation parse_observation_json(std::string_view line);

/// sites.csv + observations.jsonl in one directory. Relative refs resolve
/// against that directory.
struct Catalog {
  std::vector<Site> sites;
  std::vector<Observation> observations;

  const Site* find_site(std::string_view id) const;
};

Catalog load_catalog(const std::filesystem::path& dir);
/// Writes each file to a temporary name and renames it into place.
void save_catalog(const Catalog& catalog, const std::filesystem::path& dir);

/// Writes `contents` to `path` through a temporary file and an atomic rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Labels

struct LabelOptions {
  double side_m = kDefaultCropSideM;
  std::optional<double> extent_m2;  // defaults to side_m^2
  unsigned jobs = 1;
};

struct LabelResult {
  std::vector<Observation> observations;
  std::vector<std::string> warnings;
};

/// Attaches area labels from masks_ref and NTL labels from ntl_ref, with the
/// site location as footprint center. Ineligible dates never receive an NTL
/// label; a warning is recorded instead. Existing labels are recomputed.
LabelResult attach_labels(std::span<const Observation> observations,
                          std::span<const Site> sites,
                          const std::filesystem::path& base_dir,
                          const LabelOptions& options = {});

// ---------------------------------------------------------------------------
// Splits

enum class Partition { Train, Validation, Test };

std::string_view to_string(Partition p);
Partition parse_partition(std::string_view text);

struct SplitFractions {
  double train = 0.75;
  double validation = 0.125;
  double test = 0.125;
};

struct SiteImages {
  std::string site_id;
  std::size_t images = 0;
};

struct SplitAssignment {
  std::map<std::string, Partition> partition_of;
  std::uint64_t seed = 0;
  SplitFractions fractions;
};

/// Shuffles sites with a seeded generator, then gives each site to the
/// partition with the largest remaining image deficit (ties to the earlier
/// partition). Every partition ends within the largest site's image count
/// of its target.
SplitAssignment split_by_site(std::span<const SiteImages> sites,
                              const SplitFractions& fractions, std::uint64_t seed);

std::vector<SiteImages> images_per_site(const Catalog& catalog);

std::string splits_to_json(const SplitAssignment& s);
SplitAssignment parse_splits_json(std::string_view text);

// ---------------------------------------------------------------------------
// Batches and bundles

struct Batch {
  std::string site_id;
  std::vector<Observation> observations;  // date-ascending
};

/// One batch per site in order of first appearance.
std::vector<Batch> batch_by_site(std::span<const Observation> partition);

struct BundleFile {
  std::string path;  // relative to the bundle directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct BundleManifest {
  std::size_t target_h = 0;
  std::size_t target_w = 0;
  std::vector<std::pair<std::string, std::vector<std::string>>> batches;
  std::vector<BundleFile> files;
};

/// Resampled rasters, labels.csv and manifest.json under out_dir.
BundleManifest export_training_bundle(std::span<const Observation> partition,
                                      const std::filesystem::path& base_dir,
                                      const ResampleTarget& target,
                                      const std::filesystem::path& out_dir,
                                      unsigned jobs = 1);

std::string manifest_to_json(const BundleManifest& m);
BundleManifest parse_manifest_json(std::string_view text);

/// Recomputes every checksum. Throws Checksum naming the first bad file.
void verify_bundle(const std::filesystem::path& bundle_dir);

}  // namespace sitedev::dataset
