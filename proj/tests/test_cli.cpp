#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "sitedev/dataset.hpp"
#include "sitedev/raster.hpp"

namespace sitedev::cli {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "sitedev_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) { return dataset::read_file(p); }

std::map<std::string, std::string> metrics(const fs::path& csv) {
  std::map<std::string, std::string> m;
  std::istringstream in(slurp(csv));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    m[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return m;
}

// Four sites over four years with hand-chosen labels.
fs::path write_catalog(const std::string& name, auto&& area_of, auto&& ntl_of) {
  const auto dir = fresh_dir(name);
  dataset::Catalog c;
  for (int s = 0; s < 4; ++s) {
    c.sites.push_back({"site" + std::to_string(s), "S", 100.0 + s, 30.0, dataset::SiteClass::Factory});
    for (int y = 2018; y <= 2021; ++y) {
      dataset::Observation o;
      o.site_id = c.sites.back().id;
      o.acquired = {y, 6, 1};
      o.raster_ref = "rasters/none.ras";
      o.area_label_m2 = area_of(s, y);
      o.ntl_label = ntl_of(s, y);
      c.observations.push_back(o);
    }
  }
  dataset::save_catalog(c, dir);
  return dir;
}

TEST(Trend, ConstantFleetIsZeroPercent) {
  const auto cat = write_catalog("constant", [](int, int) { return 5000.0; },
                                 [](int, int) { return 10.0; });
  RunConfig c;
  c.catalog = cat.string();
  c.out = (cat / "out").string();
  std::ostringstream out, log;
  ASSERT_EQ(cmd_trend(c, out, log), 0) << log.str();
  const auto m = metrics(cat / "out" / "trend_summary.csv");
  EXPECT_EQ(m.at("pct_per_year"), "0");
  EXPECT_EQ(m.at("pct_total"), "0");
  EXPECT_EQ(m.at("site_change_mean"), "0");
  EXPECT_TRUE(fs::exists(cat / "out" / "trend.svg"));
  EXPECT_TRUE(fs::exists(cat / "out" / "run_config.json"));
}

TEST(Trend, BridgeFitRecoversLinearRelation) {
  const auto cat = write_catalog(
      "bridge", [](int s, int y) { return 2.0 * (3.0 * s + (y - 2018)) + 5.0; },
      [](int s, int y) { return 3.0 * s + (y - 2018); });
  RunConfig c;
  c.catalog = cat.string();
  c.out = (cat / "out").string();
  std::ostringstream out, log;
  ASSERT_EQ(cmd_trend(c, out, log), 0) << log.str();
  const auto m = metrics(cat / "out" / "trend_summary.csv");
  EXPECT_NEAR(std::stod(m.at("bridge_slope")), 2.0, 1e-12);
  EXPECT_NEAR(std::stod(m.at("bridge_intercept")), 5.0, 1e-12);
  EXPECT_NEAR(std::stod(m.at("bridge_r_squared")), 1.0, 1e-12);
}

TEST(Trend, PredictionsScoredByL1) {
  const auto cat = write_catalog("l1", [](int, int y) { return 1000.0 * (y - 2017); },
                                 [](int, int) { return 1.0; });
  {
    std::ofstream f(cat / "pred.csv");
    f << "site_id,acquired,value\n";
    for (int s = 0; s < 4; ++s)
      for (int y = 2018; y <= 2021; ++y)
        f << "site" << s << ',' << y << "-06-01," << 1000.0 * (y - 2017) + 10.0 << '\n';
  }
  RunConfig c;
  c.catalog = cat.string();
  c.out = (cat / "out").string();
  c.predictions = (cat / "pred.csv").string();
  std::ostringstream out, log;
  ASSERT_EQ(cmd_trend(c, out, log), 0) << log.str();
  EXPECT_EQ(slurp(cat / "out" / "l1.csv"), "n,l1\n16,10\n");
}

TEST(Convert, OneCorruptInputOfTenIsPartialFailure) {
  const auto dir = fresh_dir("convert");
  RunConfig c;
  c.out = (dir / "out").string();
  for (int i = 0; i < 10; ++i) {
    const auto p = dir / ("img" + std::to_string(i) + ".pgm");
    std::ofstream f(p, std::ios::binary);
    if (i == 6) {
      f << "P5 4 4 255\n\x01\x02";  // truncated payload
    } else {
      f << "P5 4 4 255\n" << std::string(16, static_cast<char>(40 + i));
    }
    c.inputs.push_back(p.string());
  }
  std::ostringstream log;
  EXPECT_EQ(cmd_convert(c, log), 2);
  EXPECT_NE(log.str().find("img6.pgm FAILED"), std::string::npos) << log.str();
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(fs::exists(dir / "out" / ("img" + std::to_string(i) + ".ras")), i != 6);
  const auto g = load_raster(dir / "out" / "img0.ras");
  // Samples are stored as float32.
  EXPECT_EQ(g.at(0, 0), static_cast<float>(40.0 / 255.0));
}

TEST(Convert, RgbTripleBecomesLuminance) {
  const auto dir = fresh_dir("rgb");
  for (auto [name, v] : {std::pair{"r", 255}, {"g", 0}, {"b", 0}}) {
    std::ofstream f(dir / (std::string(name) + ".pgm"), std::ios::binary);
    f << "P5 2 2 255\n" << std::string(4, static_cast<char>(v));
  }
  RunConfig c;
  c.out = (dir / "out").string();
  c.inputs = {(dir / "r.pgm").string() + "+" + (dir / "g.pgm").string() + "+" +
              (dir / "b.pgm").string()};
  std::ostringstream log;
  ASSERT_EQ(cmd_convert(c, log), 0) << log.str();
  EXPECT_EQ(load_raster(dir / "out" / "r.ras").at(1, 1), 0.299f);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.thresholds = {0.2, 0.7};
  c.seed = 42;
  c.center_lon = 3.5;
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(back.thresholds, c.thresholds);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.center_lon, 3.5);
  EXPECT_EQ(to_json(back), to_json(c));
}

class SynthPipeline : public ::testing::Test {
 protected:
  static void run_all(const fs::path& root) {
    RunConfig c;
    c.synth_sites = 6;
    c.synth_years = {2018, 2019, 2020};
    c.seed = 13;
    c.out = (root / "cat").string();
    std::ostringstream out, log;
    ASSERT_EQ(cmd_synth(c, out, log), 0) << log.str();
    c.catalog = c.out;
    c.out = (root / "label").string();
    ASSERT_EQ(cmd_label(c, out, log), 0) << log.str();
    c.out = (root / "split").string();
    ASSERT_EQ(cmd_split(c, out, log), 0) << log.str();
    c.out = (root / "trend").string();
    ASSERT_EQ(cmd_trend(c, out, log), 0) << log.str();
    c.pairs = (root / "cat" / "eval_pairs.csv").string();
    c.out = (root / "eval").string();
    ASSERT_EQ(cmd_eval(c, out, log), 0) << log.str();
  }
};

TEST_F(SynthPipeline, RerunIsByteIdentical) {
  const auto a = fresh_dir("run_a"), b = fresh_dir("run_b");
  run_all(a);
  run_all(b);
  for (const char* rel : {"trend/trend.csv", "trend/site_change.csv", "trend/trend_summary.csv",
                          "eval/ap.csv", "split/splits.json", "split/split_counts.csv",
                          "label/label_summary.csv", "cat/observations.jsonl"})
    EXPECT_EQ(slurp(a / rel), slurp(b / rel)) << rel;
  const auto ap = slurp(a / "eval" / "ap.csv");
  EXPECT_EQ(ap.substr(0, ap.find('\n')), "threshold,year,images,tp,fp,ap,flag");
}

TEST(Eval, MissingPairsFileIsFatal) {
  RunConfig c;
  c.pairs = "/nonexistent/pairs.csv";
  c.out = fresh_dir("eval_missing").string();
  std::ostringstream out, log;
  EXPECT_THROW(cmd_eval(c, out, log), std::exception);
}

}  // namespace
}  // namespace sitedev::cli
