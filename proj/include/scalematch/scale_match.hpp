#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scalematch/dataset.hpp"
#include "scalematch/size_stats.hpp"

namespace scalematch {

enum class ScaleMode { scale_match, monotone };

struct ScalePlanEntry {
  std::int64_t image_id = 0;
  double mean_size = 0;    // mean absolute size of the image's person boxes; 0 if none
  double target_size = 0;  // sampled or mapped target size; 0 if no person boxes
  double ratio = 1;        // c = target_size / mean_size, clamped
  bool clamped = false;
};

struct ScalePlan {
  ScaleMode mode = ScaleMode::scale_match;
  std::uint64_t seed = 0;  // unused for monotone plans
  double clamp_min = 1.0 / 32, clamp_max = 32.0;
  std::vector<ScalePlanEntry> entries;  // ascending image_id, one per source image
};

/// Draws a size from the histogram: first a bin index with probability H[k],
/// then uniformly within that bin's range.
double sample_target_size(const SizeHistogram& h, std::mt19937_64& rng);

/// One plan entry per source image: the image's mean person-box size s, a
/// sampled target size, and the ratio c = target/s clamped to
/// [clamp_min, clamp_max]. Images without person boxes pass through (c = 1).
ScalePlan build_scale_plan(const DatasetAnnotations& source, const SizeHistogram& target_hist,
                           std::uint64_t seed, double clamp_min = 1.0 / 32,
                           double clamp_max = 32.0);

/// Size-order-preserving map f(s) = F_target^-1(F_source(s)) between the
/// source's empirical size CDF and the target histogram's CDF.
struct MonotoneMap {
  EmpiricalCdf source_cdf;
  EmpiricalCdf target_cdf;

  double map_size(double s) const { return target_cdf.quantile(source_cdf.eval(s)); }
};

MonotoneMap build_monotone_map(const std::vector<double>& source_sizes,
                               const SizeHistogram& target_hist);

/// Deterministic variant of build_scale_plan: the target size for each image
/// is f(mean size) instead of a sample.
ScalePlan build_monotone_plan(const DatasetAnnotations& source, const MonotoneMap& map,
                              double clamp_min = 1.0 / 32, double clamp_max = 32.0);

enum class Interp { bilinear, nearest };

struct ApplyOptions {
  bool annotations_only = true;
  std::string image_dir_in;
  std::string image_dir_out;
  Interp interp = Interp::bilinear;
  int workers = 0;  // 0 = hardware concurrency
};

/// Rescales every image and its boxes by the plan's per-image ratio. In
/// annotation-only mode image dimensions stay real-valued (exact W*c); in
/// pixel mode images are resized to (round(W*c), round(H*c)), min 1 px.
DatasetAnnotations apply_scale_plan(const DatasetAnnotations& source, const ScalePlan& plan,
                                    const ApplyOptions& options = {});

void save_scale_plan(const ScalePlan& plan, const std::string& path);

}  // namespace scalematch
