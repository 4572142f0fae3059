#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scalematch/dataset.hpp"

namespace scalematch {

/// Half-open size interval [lo, hi).
struct SizeInterval {
  std::string name;
  double lo = 0, hi = 0;

  bool contains(double s) const { return s >= lo && s < hi; }
};

std::vector<SizeInterval> default_size_partitions();
std::vector<double> default_fppi_points();  // 9 log-spaced points in [1e-2, 1]

struct EvalConfig {
  std::vector<double> iou_thresholds = {0.25, 0.5, 0.75};
  std::vector<SizeInterval> partitions = default_size_partitions();
  std::vector<double> fppi_points = default_fppi_points();
  bool uncertain_as_ignore = true;
};

enum class DetLabel { tp, fp, ignored };
enum class GtLabel { matched, missed, out_of_range, not_target };

struct ImageMatch {
  std::vector<DetLabel> det_labels;  // parallel to the input detections
  std::vector<int> det_matched_gt;   // index into gts, or -1
  std::vector<GtLabel> gt_labels;    // parallel to the input ground truth
};

/// Greedy matching for one image. Detections in descending-score order each
/// take the unmatched in-partition ground truth with the highest IoU >=
/// threshold (IoU ties broken by smaller gt id). Unmatched detections are
/// then absorbed by ignore regions (IOD >= threshold) or out-of-partition
/// ground truth (IoU >= threshold); the rest are false positives.
ImageMatch match_image(std::span<const Detection> dets, std::span<const BoxRecord> gts,
                       double iou_threshold, const SizeInterval& partition,
                       bool uncertain_as_ignore = true);

struct ScoredLabel {
  double score = 0;
  bool tp = false;
};

struct PrPoint {
  double score = 0, recall = 0, precision = 0;
};

/// Area under the precision-recall curve with the precision envelope
/// (all-points interpolation). NaN when n_gt is zero.
double average_precision(std::vector<ScoredLabel> labels, std::int64_t n_gt,
                         std::vector<PrPoint>* curve = nullptr);

/// Log-average miss rate: geometric mean of the miss rate sampled at the
/// given FPPI reference points. NaN when n_gt is zero.
double miss_rate(std::vector<ScoredLabel> labels, std::int64_t n_gt, std::int64_t n_images,
                 const std::vector<double>& fppi_points);

struct EvalCell {
  std::string partition;
  double size_lo = 0, size_hi = 0;
  double iou_threshold = 0;
  double ap = 0;  // NaN when n_gt == 0
  double mr = 0;  // NaN when n_gt == 0
  std::int64_t tp = 0, fp = 0, fn = 0, n_gt = 0, n_ignored_dets = 0;
  std::vector<PrPoint> pr_curve;
};

struct EvalReport {
  EvalConfig config;
  std::int64_t n_images = 0;
  std::vector<EvalCell> cells;  // partition-major, then threshold
};

/// Full (partition x threshold) grid of AP and miss rate with counts.
/// Throws ImageIdMismatch if a detection references an unknown image.
EvalReport evaluate(const DetectionSet& dets, const DatasetAnnotations& gt,
                    const EvalConfig& cfg = {});

void render_report(const EvalReport& report, std::ostream& out);
void save_report(const EvalReport& report, const std::string& path);

}  // namespace scalematch
