#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sitedev {

/// A maximal run of set pixels over row-major pixel indices.
struct Run {
  std::uint64_t start = 0;
  std::uint64_t length = 0;

  std::uint64_t end() const { return start + length; }
  bool operator==(const Run&) const = default;
};

/// Run-length encoded binary mask of one instance.
///
/// Runs are sorted, non-overlapping and non-adjacent, lie inside the grid,
/// and cover at least one pixel.
class InstanceMask {
 public:
  InstanceMask(std::size_t grid_h, std::size_t grid_w, std::vector<Run> runs);

  /// Builds from a row-major boolean grid. Returns nullopt if no pixel is set.
  static std::optional<InstanceMask> from_bitmap(std::size_t grid_h,
                                                 std::size_t grid_w,
                                                 std::span<const std::uint8_t> bits);
  /// Axis-aligned box of pixels [row0, row1) x [col0, col1).
  static InstanceMask rectangle(std::size_t grid_h, std::size_t grid_w,
                                std::size_t row0, std::size_t col0,
                                std::size_t row1, std::size_t col1);

  std::size_t grid_h() const { return grid_h_; }
  std::size_t grid_w() const { return grid_w_; }
  std::span<const Run> runs() const { return runs_; }
  std::uint64_t pixel_count() const { return pixel_count_; }

  std::vector<std::uint8_t> to_bitmap() const;

  bool operator==(const InstanceMask&) const = default;

 private:
  std::size_t grid_h_;
  std::size_t grid_w_;
  std::vector<Run> runs_;
  std::uint64_t pixel_count_ = 0;
};

enum class Provenance { GroundTruthGeocoded, ModelPrediction };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view text);

class MaskSet {
 public:
  MaskSet(std::size_t grid_h, std::size_t grid_w, Provenance provenance,
          std::vector<InstanceMask> instances = {});

  std::size_t grid_h() const { return grid_h_; }
  std::size_t grid_w() const { return grid_w_; }
  Provenance provenance() const { return provenance_; }
  std::span<const InstanceMask> instances() const { return instances_; }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }

  bool operator==(const MaskSet&) const = default;

 private:
  std::size_t grid_h_;
  std::size_t grid_w_;
  Provenance provenance_;
  std::vector<InstanceMask> instances_;
};

/// |a ∩ b| in pixels.
std::uint64_t intersection_count(const InstanceMask& a, const InstanceMask& b);

/// P_S: pixels covered by at least one instance, each counted once.
std::uint64_t union_pixel_count(const MaskSet& s);

inline constexpr double kDefaultExtentM2 = 800.0 * 800.0;

/// A = extent_m2 * P_S / (H * W).
double structural_area(const MaskSet& s, double extent_m2 = kDefaultExtentM2);

double iou(const InstanceMask& a, const InstanceMask& b);

struct MatchPair {
  std::size_t prediction = 0;
  std::size_t truth = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> unmatched_predictions;
  std::vector<std::size_t> unmatched_truths;
};

/// Greedy one-to-one matching in descending IoU order over pairs with
/// IoU >= threshold. Ties go to the lower prediction index, then the lower
/// truth index.
MatchResult match_instances(const MaskSet& preds, const MaskSet& truths,
                            double threshold);

struct DetectionCounts {
  std::uint64_t true_positives = 0;
  std::uint64_t false_positives = 0;
};

DetectionCounts count_detections(const MaskSet& preds, const MaskSet& truths,
                                 double threshold);

/// TP / (TP + FP). Throws UndefinedMetric when there are no predictions.
double average_precision(const MaskSet& preds, const MaskSet& truths,
                         double threshold);

struct EvalImage {
  MaskSet predictions;
  MaskSet truths;
  int year = 0;
};

enum class ApFlag { Ok, FewExamples, Undefined };

std::string_view to_string(ApFlag flag);

struct ApRow {
  int year = 0;
  std::size_t images = 0;
  DetectionCounts counts;
  std::optional<double> ap;  // empty when the year has no predictions
  ApFlag flag = ApFlag::Ok;
};

inline constexpr std::size_t kDefaultMinGroupImages = 9;

/// Pools TP/FP per year. Rows are sorted by year.
std::vector<ApRow> ap_grouped(std::span<const EvalImage> dataset, double threshold,
                              std::size_t min_images = kDefaultMinGroupImages);

// Mask file: {"grid_h", "grid_w", "provenance", "instances": [[[start, len], ...], ...]}

MaskSet parse_mask_json(std::string_view text);
std::string mask_to_json(const MaskSet& s);
MaskSet load_masks(const std::filesystem::path& path);
void save_masks(const MaskSet& s, const std::filesystem::path& path);

}  // namespace sitedev
