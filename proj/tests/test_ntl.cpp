#include <gtest/gtest.h>

#include <map>
#include <random>

#include "oracles.hpp"
#include "sitedev/error.hpp"
#include "sitedev/ntl.hpp"

namespace sitedev::ntl {
namespace {

RasterGrid::Meta radiance_meta(double cell_m, YearMonth period = {2019, 6}) {
  RasterGrid::Meta m;
  m.band_kind = BandKind::Radiance;
  m.acquired = {period.year, period.month, 1};
  m.period = period;
  m.transform.origin_lon = 10.0;
  m.transform.origin_lat = 50.0;
  m.transform.anchor_lat = 50.0;
  m.transform.pixel_size_x_m = m.transform.pixel_size_y_m = cell_m;
  return m;
}

NtlGrid make_grid(std::size_t h, std::size_t w, std::vector<double> v, double cell_m = 500.0) {
  return NtlGrid(RasterGrid(h, w, std::move(v), radiance_meta(cell_m)));
}

Footprint at_local(const NtlGrid& g, double east_m, double south_m, double side_m = 800.0) {
  Footprint f;
  f.side_m = side_m;
  g.grid().transform().to_geographic(east_m, south_m, f.center_lon, f.center_lat);
  return f;
}

TEST(Eligibility, AprilTwentyTwelveBoundary) {
  EXPECT_FALSE(eligible({2011, 6, 15}));
  EXPECT_FALSE(eligible({2012, 3, 31}));
  EXPECT_TRUE(eligible({2012, 4, 1}));
  EXPECT_TRUE(eligible({2020, 1, 1}));
}

TEST(NtlGrid, Validation) {
  EXPECT_THROW(make_grid(1, 1, {-0.5}), Error);
  auto m = radiance_meta(500.0);
  m.period.reset();
  EXPECT_THROW(NtlGrid(RasterGrid(1, 1, {1.0}, m)), Error);
  EXPECT_THROW(NtlGrid(RasterGrid(1, 1, {1.0}, radiance_meta(500.0, {2011, 6}))), Error);
  auto pan = radiance_meta(500.0);
  pan.band_kind = BandKind::Panchromatic;
  EXPECT_THROW(NtlGrid(RasterGrid(1, 1, {0.5}, pan)), Error);
}

TEST(Label, NoQualifyingCellThrowsNoLabel) {
  const auto g = make_grid(3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9}, 1000.0);
  try {
    ntl_label(g, at_local(g, 1500.0, 1500.0, 400.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoLabel);
  }
}

TEST(Label, MaximumOverQualifyingCells) {
  // 800 m footprint centered on the corner shared by four 500 m cells: each
  // cell is covered 400x400 / 500x500 = 64%.
  const auto g = make_grid(2, 2, {3.0, 7.0, 5.0, 1.0});
  const auto cells = overlapping_cells(g, at_local(g, 500.0, 500.0));
  ASSERT_EQ(cells.size(), 4u);
  for (const auto& c : cells) EXPECT_NEAR(c.fraction, 0.64, 1e-6);
  const auto label = ntl_label(g, at_local(g, 500.0, 500.0));
  EXPECT_EQ(label.radiance, 7.0);
  EXPECT_EQ(label.cell, 1u);
}

TEST(Label, TiesGoToLowestIndex) {
  const auto g = make_grid(2, 2, {4.0, 4.0, 4.0, 4.0});
  EXPECT_EQ(ntl_label(g, at_local(g, 500.0, 500.0)).cell, 0u);
}

TEST(Label, ExactHalfOverlapQualifies) {
  // Footprint 500 m wide covering the right half of cell 0 and left half of cell 1.
  const auto g = make_grid(1, 2, {2.0, 9.0});
  const auto cells = overlapping_cells(g, at_local(g, 500.0, 250.0, 500.0));
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_NEAR(cells[0].fraction, 0.5, 1e-9);
}

TEST(Overlap, AgreesWithSubsampledOracle) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double cell = 500.0;
  const auto g = make_grid(8, 8, std::vector<double>(64, 1.0), cell);
  for (int trial = 0; trial < 100; ++trial) {
    const double side = 300.0 + 900.0 * u(gen);
    const double east = side / 2 + u(gen) * (8 * cell - side);
    const double south = side / 2 + u(gen) * (8 * cell - side);
    const auto f = at_local(g, east, south, side);
    const auto got = overlapping_cells(g, f);
    std::map<std::size_t, double> by_cell;
    for (const auto& c : got) by_cell[c.cell] = c.fraction;
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 8; ++c) {
        const double want = oracle::subsampled_overlap(c * cell, (c + 1) * cell, r * cell,
                                                       (r + 1) * cell, east - side / 2,
                                                       east + side / 2, south - side / 2,
                                                       south + side / 2);
        const auto it = by_cell.find(r * 8 + c);
        if (it != by_cell.end()) {
          EXPECT_NEAR(it->second, want, 0.02);
        } else {
          EXPECT_LT(want, 0.5 + 0.02) << "cell " << r * 8 + c << " should qualify";
        }
        if (want < 0.5 - 0.02) {
          EXPECT_EQ(it, by_cell.end());
        }
      }
  }
}

TEST(Label, InvariantToSubThresholdCells) {
  std::mt19937 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(36);
    for (double& x : v) x = 50.0 * u(gen);
    const auto g = make_grid(6, 6, v);
    const double east = 500.0 + 2000.0 * u(gen), south = 500.0 + 2000.0 * u(gen);
    const auto f = at_local(g, east, south);
    const auto cells = overlapping_cells(g, f);
    if (cells.empty()) continue;
    std::vector<bool> qualifies(36, false);
    for (const auto& c : cells) qualifies[c.cell] = true;
    auto changed = v;
    for (std::size_t i = 0; i < changed.size(); ++i)
      if (!qualifies[i]) changed[i] = 1000.0 * u(gen);
    const auto a = ntl_label(g, f), b = ntl_label(make_grid(6, 6, changed), f);
    EXPECT_EQ(a.radiance, b.radiance);
    EXPECT_EQ(a.cell, b.cell);
  }
}

}  // namespace
}  // namespace sitedev::ntl
