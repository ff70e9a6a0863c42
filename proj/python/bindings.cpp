// Python bindings for the sitedev core.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sitedev/analytics.hpp"
#include "sitedev/dataset.hpp"
#include "sitedev/error.hpp"
#include "sitedev/masks.hpp"
#include "sitedev/ntl.hpp"
#include "sitedev/raster.hpp"
#include "sitedev/synth.hpp"

namespace py = pybind11;
using namespace sitedev;

namespace {

using Array2D = py::array_t<double, py::array::c_style | py::array::forcecast>;

RasterGrid grid_from_array(const Array2D& a, BandKind kind = BandKind::Panchromatic) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  const auto h = static_cast<std::size_t>(a.shape(0)), w = static_cast<std::size_t>(a.shape(1));
  RasterGrid::Meta m;
  m.band_kind = kind;
  return RasterGrid(h, w, std::vector<double>(a.data(), a.data() + h * w), m);
}

py::array_t<double> to_array(const RasterGrid& g) {
  py::array_t<double> out({g.height(), g.width()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

py::array_t<std::uint8_t> bitmap_array(const InstanceMask& m) {
  py::array_t<std::uint8_t> out({m.grid_h(), m.grid_w()});
  const auto bits = m.to_bitmap();
  std::copy(bits.begin(), bits.end(), out.mutable_data());
  return out;
}

py::dict trend_dict(const analytics::TrendReport& r) {
  py::list years;
  for (const auto& y : r.per_year) {
    py::dict d;
    d["year"] = y.year;
    d["mean"] = y.mean;
    d["ci_low"] = y.ci_low;
    d["ci_high"] = y.ci_high;
    d["n"] = y.n;
    years.append(d);
  }
  py::dict out;
  out["per_year"] = years;
  out["slope"] = r.fit.slope;
  out["intercept"] = r.fit.intercept;
  out["r_squared"] = r.fit.r_squared;
  out["pct_change_per_year"] = r.pct_change_per_year;
  out["pct_change_total"] = r.pct_change_total;
  return out;
}

}  // namespace

PYBIND11_MODULE(_sitedev, m) {
  m.doc() = "Structural-area and nighttime-light analytics for industrial sites";

  static py::exception<Error> error_type(m, "SitedevError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(
          std::string(to_string(e.kind())) + ": " + e.what());
      exc.attr("kind") = to_string(e.kind());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  // raster
  m.def(
      "rgb_to_luminance",
      [](const Array2D& r, const Array2D& g, const Array2D& b) {
        return to_array(rgb_to_luminance(grid_from_array(r), grid_from_array(g), grid_from_array(b)));
      },
      py::arg("r"), py::arg("g"), py::arg("b"));
  m.def(
      "resample_bilinear",
      [](const Array2D& a, std::size_t h, std::size_t w) {
        return to_array(resample_bilinear(grid_from_array(a, BandKind::Radiance), h, w));
      },
      py::arg("values"), py::arg("height"), py::arg("width"));
  m.def(
      "load_raster",
      [](const std::filesystem::path& p) {
        const RasterGrid g = load_raster(p);
        py::dict meta;
        meta["band_kind"] = std::string(to_string(g.band_kind()));
        meta["acquired"] = g.acquired().to_string();
        meta["pixel_size_x_m"] = g.transform().pixel_size_x_m;
        meta["pixel_size_y_m"] = g.transform().pixel_size_y_m;
        meta["origin_lon"] = g.transform().origin_lon;
        meta["origin_lat"] = g.transform().origin_lat;
        if (g.meta().period) meta["period"] = g.meta().period->to_string();
        return py::make_tuple(to_array(g), meta);
      },
      py::arg("path"), "Returns (values, metadata) for a .ras file.");

  // masks
  py::class_<InstanceMask>(m, "InstanceMask")
      .def_static(
          "from_bitmap",
          [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> bits) {
            if (bits.ndim() != 2) throw py::value_error("expected a 2-D array");
            const auto h = static_cast<std::size_t>(bits.shape(0));
            const auto w = static_cast<std::size_t>(bits.shape(1));
            auto mask = InstanceMask::from_bitmap(h, w, std::span(bits.data(), h * w));
            if (!mask) throw py::value_error("bitmap has no set pixels");
            return *mask;
          },
          py::arg("bitmap"))
      .def_static("rectangle", &InstanceMask::rectangle, py::arg("grid_h"), py::arg("grid_w"),
                  py::arg("row0"), py::arg("col0"), py::arg("row1"), py::arg("col1"))
      .def_property_readonly("pixel_count", &InstanceMask::pixel_count)
      .def_property_readonly("shape",
                             [](const InstanceMask& x) { return py::make_tuple(x.grid_h(), x.grid_w()); })
      .def("to_bitmap", &bitmap_array)
      .def("__eq__", [](const InstanceMask& a, const InstanceMask& b) { return a == b; });

  py::class_<MaskSet>(m, "MaskSet")
      .def(py::init([](std::size_t h, std::size_t w, const std::string& provenance,
                       std::vector<InstanceMask> instances) {
             return MaskSet(h, w, parse_provenance(provenance), std::move(instances));
           }),
           py::arg("grid_h"), py::arg("grid_w"), py::arg("provenance"),
           py::arg("instances") = std::vector<InstanceMask>{})
      .def_property_readonly("provenance",
                             [](const MaskSet& s) { return std::string(to_string(s.provenance())); })
      .def_property_readonly("instances", [](const MaskSet& s) {
        return std::vector<InstanceMask>(s.instances().begin(), s.instances().end());
      })
      .def("__len__", &MaskSet::size)
      .def("to_json", &mask_to_json)
      .def_static("from_json", [](const std::string& text) { return parse_mask_json(text); });

  m.def("load_masks", &load_masks, py::arg("path"));
  m.def("save_masks", &save_masks, py::arg("masks"), py::arg("path"));
  m.def("union_pixel_count", &union_pixel_count, py::arg("masks"));
  m.def("structural_area", &structural_area, py::arg("masks"), py::arg("extent_m2") = kDefaultExtentM2);
  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.def("average_precision", &average_precision, py::arg("predictions"), py::arg("truths"),
        py::arg("threshold"));
  m.def(
      "match_instances",
      [](const MaskSet& p, const MaskSet& t, double threshold) {
        const auto r = match_instances(p, t, threshold);
        py::list pairs;
        for (const auto& x : r.pairs) pairs.append(py::make_tuple(x.prediction, x.truth, x.iou));
        return pairs;
      },
      py::arg("predictions"), py::arg("truths"), py::arg("threshold"),
      "List of (prediction, truth, iou) matched pairs.");

  // nighttime lights
  m.def(
      "ntl_eligible", [](const std::string& date) { return ntl::eligible(Date::parse(date)); },
      py::arg("acquired"));
  m.def(
      "ntl_label",
      [](const std::filesystem::path& grid, double lon, double lat, double side_m) {
        const ntl::NtlGrid g(load_raster(grid));
        const auto label = ntl::ntl_label(g, {lon, lat, side_m});
        return py::make_tuple(label.radiance, label.cell);
      },
      py::arg("grid_path"), py::arg("lon"), py::arg("lat"), py::arg("side_m") = kDefaultCropSideM,
      "Returns (radiance, cell index).");

  // analytics
  py::class_<analytics::LinearFit>(m, "LinearFit")
      .def_readonly("slope", &analytics::LinearFit::slope)
      .def_readonly("intercept", &analytics::LinearFit::intercept)
      .def_readonly("r_squared", &analytics::LinearFit::r_squared)
      .def_readonly("n", &analytics::LinearFit::n)
      .def("predict", &analytics::LinearFit::predict);
  m.def(
      "ols_fit",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        if (x.size() != y.size()) throw py::value_error("x and y differ in length");
        std::vector<analytics::Point> pts(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) pts[i] = {x[i], y[i]};
        return analytics::ols_fit(pts);
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "l1_score",
      [](const std::vector<double>& p, const std::vector<double>& l) { return analytics::l1_score(p, l); },
      py::arg("predictions"), py::arg("labels"));
  m.def(
      "yearly_trend",
      [](const std::vector<std::pair<int, double>>& obs, double level) {
        std::vector<analytics::YearValue> v;
        for (const auto& [y, x] : obs) v.push_back({y, x});
        return trend_dict(analytics::yearly_trend(v, level));
      },
      py::arg("observations"), py::arg("level") = 0.95,
      "observations: iterable of (year, value) pairs.");

  // dataset
  m.def(
      "split_by_site",
      [](const std::map<std::string, std::size_t>& images, std::tuple<double, double, double> fr,
         std::uint64_t seed) {
        std::vector<dataset::SiteImages> sites;
        for (const auto& [id, n] : images) sites.push_back({id, n});
        const auto a = dataset::split_by_site(
            sites, {std::get<0>(fr), std::get<1>(fr), std::get<2>(fr)}, seed);
        std::map<std::string, std::string> out;
        for (const auto& [id, p] : a.partition_of) out[id] = std::string(to_string(p));
        return out;
      },
      py::arg("images_per_site"), py::arg("fractions") = std::make_tuple(0.75, 0.125, 0.125),
      py::arg("seed") = 0);

  // synthetic scenes
  m.def(
      "generate_scene",
      [](std::size_t size, double pixel_size_m, std::uint64_t seed, bool subpixel) {
        synth::SceneSpec spec;
        spec.grid_h = spec.grid_w = size;
        spec.pixel_size_m = pixel_size_m;
        spec.seed = seed;
        spec.subpixel = subpixel;
        const auto s = synth::generate_scene(spec);
        py::dict out;
        out["raster"] = to_array(s.raster);
        out["masks"] = s.masks;
        out["exact_area_m2"] = s.exact_area_m2;
        out["perimeter_px"] = s.perimeter_px;
        out["extent_m2"] = spec.extent_m2();
        return out;
      },
      py::arg("size") = 200, py::arg("pixel_size_m") = 4.0, py::arg("seed") = 1,
      py::arg("subpixel") = false);
}
