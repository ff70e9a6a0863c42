#include "sitedev/masks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "sitedev/error.hpp"

namespace sitedev {

InstanceMask::InstanceMask(std::size_t grid_h, std::size_t grid_w, std::vector<Run> runs)
    : grid_h_(grid_h), grid_w_(grid_w), runs_(std::move(runs)) {
  if (grid_h_ == 0 || grid_w_ == 0)
    throw Error(ErrorKind::Dimension, "mask grid must be at least 1x1");
  const std::uint64_t limit = static_cast<std::uint64_t>(grid_h_) * grid_w_;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    const Run& r = runs_[i];
    if (r.length == 0) throw Error(ErrorKind::Validation, "mask run has zero length");
    if (r.start >= limit || r.length > limit - r.start)
      throw Error(ErrorKind::Validation, "mask run exceeds the grid");
    if (i > 0 && r.start <= runs_[i - 1].end())
      throw Error(ErrorKind::Validation,
                  "mask runs must be sorted, disjoint and non-adjacent");
    pixel_count_ += r.length;
  }
  if (pixel_count_ == 0) throw Error(ErrorKind::Validation, "mask covers no pixels");
}

std::optional<InstanceMask> InstanceMask::from_bitmap(std::size_t grid_h, std::size_t grid_w,
                                                      std::span<const std::uint8_t> bits) {
  if (bits.size() != grid_h * grid_w)
    throw Error(ErrorKind::Dimension, "bitmap size does not match the grid");
  std::vector<Run> runs;
  for (std::size_t i = 0; i < bits.size();) {
    if (!bits[i]) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < bits.size() && bits[i]) ++i;
    runs.push_back({start, i - start});
  }
  if (runs.empty()) return std::nullopt;
  return InstanceMask(grid_h, grid_w, std::move(runs));
}

InstanceMask InstanceMask::rectangle(std::size_t grid_h, std::size_t grid_w, std::size_t row0,
                                     std::size_t col0, std::size_t row1, std::size_t col1) {
  if (row1 <= row0 || col1 <= col0 || row1 > grid_h || col1 > grid_w)
    throw Error(ErrorKind::OutOfRange, "rectangle outside the grid or empty");
  std::vector<Run> runs;
  if (col0 == 0 && col1 == grid_w) {
    runs.push_back({row0 * grid_w, (row1 - row0) * grid_w});
  } else {
    runs.reserve(row1 - row0);
    for (std::size_t r = row0; r < row1; ++r) runs.push_back({r * grid_w + col0, col1 - col0});
  }
  return InstanceMask(grid_h, grid_w, std::move(runs));
}

std::vector<std::uint8_t> InstanceMask::to_bitmap() const {
  std::vector<std::uint8_t> bits(grid_h_ * grid_w_, 0);
  for (const Run& r : runs_) std::fill_n(bits.begin() + r.start, r.length, 1);
  return bits;
}

std::string_view to_string(Provenance p) {
  return p == Provenance::GroundTruthGeocoded ? "ground_truth_geocoded" : "model_prediction";
}

Provenance parse_provenance(std::string_view text) {
  if (text == "ground_truth_geocoded") return Provenance::GroundTruthGeocoded;
  if (text == "model_prediction") return Provenance::ModelPrediction;
  throw Error(ErrorKind::Load, "unknown provenance '" + std::string(text) + "'");
}

MaskSet::MaskSet(std::size_t grid_h, std::size_t grid_w, Provenance provenance,
                 std::vector<InstanceMask> instances)
    : grid_h_(grid_h), grid_w_(grid_w), provenance_(provenance), instances_(std::move(instances)) {
  if (grid_h_ == 0 || grid_w_ == 0)
    throw Error(ErrorKind::Dimension, "mask grid must be at least 1x1");
  for (const auto& m : instances_)
    if (m.grid_h() != grid_h_ || m.grid_w() != grid_w_)
      throw Error(ErrorKind::Dimension, "instance grid differs from the mask set grid");
}

namespace {

void require_same_grid(std::size_t h1, std::size_t w1, std::size_t h2, std::size_t w2) {
  if (h1 != h2 || w1 != w2)
    throw Error(ErrorKind::Dimension, "grids differ: " + std::to_string(h1) + "x" +
                                          std::to_string(w1) + " vs " + std::to_string(h2) +
                                          "x" + std::to_string(w2));
}

}  // namespace

std::uint64_t intersection_count(const InstanceMask& a, const InstanceMask& b) {
  require_same_grid(a.grid_h(), a.grid_w(), b.grid_h(), b.grid_w());
  const auto ra = a.runs(), rb = b.runs();
  std::uint64_t total = 0;
  std::size_t i = 0, j = 0;
  while (i < ra.size() && j < rb.size()) {
    const std::uint64_t lo = std::max(ra[i].start, rb[j].start);
    const std::uint64_t hi = std::min(ra[i].end(), rb[j].end());
    if (hi > lo) total += hi - lo;
    if (ra[i].end() < rb[j].end())
      ++i;
    else
      ++j;
  }
  return total;
}

std::uint64_t union_pixel_count(const MaskSet& s) {
  std::vector<Run> all;
  for (const auto& m : s.instances()) all.insert(all.end(), m.runs().begin(), m.runs().end());
  std::sort(all.begin(), all.end(), [](const Run& x, const Run& y) { return x.start < y.start; });
  std::uint64_t total = 0, covered_to = 0;
  for (const Run& r : all) {
    const std::uint64_t lo = std::max(r.start, covered_to);
    if (r.end() > lo) {
      total += r.end() - lo;
      covered_to = r.end();
    }
  }
  return total;
}

double structural_area(const MaskSet& s, double extent_m2) {
  if (!std::isfinite(extent_m2) || extent_m2 < 0.0)
    throw Error(ErrorKind::OutOfRange, "footprint extent must be a finite non-negative area");
  const double pixels = static_cast<double>(s.grid_h()) * static_cast<double>(s.grid_w());
  return extent_m2 * static_cast<double>(union_pixel_count(s)) / pixels;
}

double iou(const InstanceMask& a, const InstanceMask& b) {
  const std::uint64_t inter = intersection_count(a, b);
  const std::uint64_t uni = a.pixel_count() + b.pixel_count() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MatchResult match_instances(const MaskSet& preds, const MaskSet& truths, double threshold) {
  require_same_grid(preds.grid_h(), preds.grid_w(), truths.grid_h(), truths.grid_w());
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw Error(ErrorKind::OutOfRange, "IoU threshold must lie in (0, 1]");

  std::vector<MatchPair> candidates;
  for (std::size_t p = 0; p < preds.size(); ++p)
    for (std::size_t t = 0; t < truths.size(); ++t) {
      const double v = iou(preds.instances()[p], truths.instances()[t]);
      if (v >= threshold) candidates.push_back({p, t, v});
    }
  std::sort(candidates.begin(), candidates.end(), [](const MatchPair& x, const MatchPair& y) {
    if (x.iou != y.iou) return x.iou > y.iou;
    if (x.prediction != y.prediction) return x.prediction < y.prediction;
    return x.truth < y.truth;
  });

  std::vector<bool> pred_used(preds.size(), false), truth_used(truths.size(), false);
  MatchResult result;
  for (const MatchPair& c : candidates) {
    if (pred_used[c.prediction] || truth_used[c.truth]) continue;
    pred_used[c.prediction] = truth_used[c.truth] = true;
    result.pairs.push_back(c);
  }
  for (std::size_t p = 0; p < preds.size(); ++p)
    if (!pred_used[p]) result.unmatched_predictions.push_back(p);
  for (std::size_t t = 0; t < truths.size(); ++t)
    if (!truth_used[t]) result.unmatched_truths.push_back(t);
  return result;
}

DetectionCounts count_detections(const MaskSet& preds, const MaskSet& truths, double threshold) {
  const MatchResult m = match_instances(preds, truths, threshold);
  return {m.pairs.size(), m.unmatched_predictions.size()};
}

double average_precision(const MaskSet& preds, const MaskSet& truths, double threshold) {
  if (preds.empty())
    throw Error(ErrorKind::UndefinedMetric, "average precision is undefined without predictions");
  const DetectionCounts c = count_detections(preds, truths, threshold);
  return static_cast<double>(c.true_positives) /
         static_cast<double>(c.true_positives + c.false_positives);
}

std::string_view to_string(ApFlag flag) {
  switch (flag) {
    case ApFlag::Ok: return "ok";
    case ApFlag::FewExamples: return "few_examples";
    case ApFlag::Undefined: return "undefined";
  }
  return "ok";
}

std::vector<ApRow> ap_grouped(std::span<const EvalImage> dataset, double threshold,
                              std::size_t min_images) {
  std::map<int, ApRow> rows;
  for (const EvalImage& img : dataset) {
    ApRow& row = rows[img.year];
    row.year = img.year;
    ++row.images;
    const DetectionCounts c = count_detections(img.predictions, img.truths, threshold);
    row.counts.true_positives += c.true_positives;
    row.counts.false_positives += c.false_positives;
  }
  std::vector<ApRow> out;
  for (auto& [year, row] : rows) {
    const std::uint64_t n = row.counts.true_positives + row.counts.false_positives;
    if (n == 0) {
      row.flag = ApFlag::Undefined;
    } else {
      row.ap = static_cast<double>(row.counts.true_positives) / static_cast<double>(n);
      row.flag = row.images < min_images ? ApFlag::FewExamples : ApFlag::Ok;
    }
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mask files

MaskSet parse_mask_json(std::string_view text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
    const auto h = j.at("grid_h").get<std::size_t>();
    const auto w = j.at("grid_w").get<std::size_t>();
    const auto prov = parse_provenance(j.at("provenance").get<std::string>());
    std::vector<InstanceMask> instances;
    for (const auto& inst : j.at("instances")) {
      std::vector<Run> runs;
      runs.reserve(inst.size());
      for (const auto& r : inst) {
        if (!r.is_array() || r.size() != 2)
          throw Error(ErrorKind::Load, "mask run must be a [start, length] pair");
        runs.push_back({r[0].get<std::uint64_t>(), r[1].get<std::uint64_t>()});
      }
      instances.emplace_back(h, w, std::move(runs));
    }
    return MaskSet(h, w, prov, std::move(instances));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Load, std::string("malformed mask file: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::Load, std::string("invalid mask file: ") + e.what());
  }
}

std::string mask_to_json(const MaskSet& s) {
  // Hand-rolled to keep files compact and key order fixed.
  std::ostringstream out;
  out << "{\"grid_h\":" << s.grid_h() << ",\"grid_w\":" << s.grid_w() << ",\"provenance\":\""
      << to_string(s.provenance()) << "\",\"instances\":[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out << ',';
    out << '[';
    const auto runs = s.instances()[i].runs();
    for (std::size_t k = 0; k < runs.size(); ++k) {
      if (k) out << ',';
      out << '[' << runs[k].start << ',' << runs[k].length << ']';
    }
    out << ']';
  }
  out << "]}\n";
  return out.str();
}

MaskSet load_masks(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_mask_json(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_masks(const MaskSet& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << mask_to_json(s);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace sitedev
