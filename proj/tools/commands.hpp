#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sitedev::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Every knob a subcommand reads. Serialized into each output directory.
struct RunConfig {
  // paths
  std::string catalog;
  std::string out = "out";
  std::string pairs;        // eval: CSV of pred,truth,year
  std::string splits;       // bundle/report: splits.json
  std::string predictions;  // trend: CSV of site_id,acquired,value
  std::vector<std::string> inputs;  // convert

  // raster
  double side_m = 800.0;
  std::size_t resample_h = 516;
  std::size_t resample_w = 426;
  bool crop = false;
  bool resample = false;
  std::optional<double> center_lon;
  std::optional<double> center_lat;
  double origin_lon = 0.0;
  double origin_lat = 0.0;
  double pixel_size_m = 0.5;
  std::string acquired = "2020-01-01";

  // evaluation
  std::vector<double> thresholds{0.1, 0.3, 0.5};
  std::size_t min_group_images = 9;

  // split / bundle
  std::vector<double> fractions{0.75, 0.125, 0.125};
  std::uint64_t seed = 0;
  std::string partition = "train";  // train | validation | test | all
  std::string verify;               // bundle: verify this directory instead of exporting

  // trend / label
  double ci_level = 0.95;
  std::string value = "area";  // area | ntl
  bool sample_sd = false;

  // synth
  std::size_t synth_sites = 50;
  std::vector<int> synth_years{2018, 2019, 2020, 2021};
  double synth_mean_growth = 1000.0;
  double synth_growth_sd = 500.0;
  double synth_jitter = 500.0;
  std::size_t synth_grid = 128;

  unsigned jobs = 1;
};

nlohmann::json to_json(const RunConfig& c);
/// Overlays the keys present in `j` onto `base`.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

/// Writes run_config.json (command, tool version, config) into c.out.
void echo_config(const std::string& command, const RunConfig& c);

// Exit codes: 0 success, 1 fatal error, 2 partial failure.
int cmd_convert(const RunConfig& c, std::ostream& log);
int cmd_label(const RunConfig& c, std::ostream& out, std::ostream& log);
int cmd_eval(const RunConfig& c, std::ostream& out, std::ostream& log);
int cmd_split(const RunConfig& c, std::ostream& out, std::ostream& log);
int cmd_bundle(const RunConfig& c, std::ostream& out, std::ostream& log);
int cmd_trend(const RunConfig& c, std::ostream& out, std::ostream& log);
int cmd_synth(const RunConfig& c, std::ostream& out, std::ostream& log);
int cmd_report(const RunConfig& c, std::ostream& out, std::ostream& log);

}  // namespace sitedev::cli
