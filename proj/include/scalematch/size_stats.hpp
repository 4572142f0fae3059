#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scalematch/dataset.hpp"

namespace scalematch {

/// Absolute size: square root of the bounding-box area, in pixels.
inline double absolute_size(double w, double h) { return std::sqrt(w * h); }
inline double absolute_size(const BoxRecord& b) { return absolute_size(b.w, b.h); }

/// Relative size: square root of box area over image area.
inline double relative_size(const BoxRecord& b, const ImageRecord& img) {
  return std::sqrt((b.w * b.h) / (img.width * img.height));
}

/// Which annotations contribute to size statistics. Ignore regions and
/// uncertain boxes are excluded by default.
struct SizeFilter {
  bool include_ignore = false;
  bool include_uncertain = false;

  bool accepts(const BoxRecord& b) const {
    if (b.category == Category::ignore_region) return include_ignore;
    if (b.uncertain) return include_uncertain;
    return true;
  }
};

std::vector<double> collect_sizes(const DatasetAnnotations& ds, SizeFilter filter = {});

struct HistBin {
  double lo = 0, hi = 0;
  bool closed_right = false;  // right edge inclusive

  bool operator==(const HistBin&) const = default;
};

/// Discrete histogram over object sizes: probabilities plus bin ranges.
/// A bin following a right-closed bin is open on the left, so the ranges
/// partition the support.
struct SizeHistogram {
  std::vector<double> probs;  // sums to 1
  std::vector<HistBin> bins;  // contiguous, non-decreasing
  std::size_t count = 0;      // number of sizes used for estimation

  std::size_t k() const { return bins.size(); }
  double min_size() const { return bins.front().lo; }
  double max_size() const { return bins.back().hi; }

  /// Index of the bin whose range contains s, or nullopt outside the support.
  std::optional<std::size_t> bin_index(double s) const;
};

/// Histogram whose first/last bins absorb the ceil(N/k) smallest/largest
/// sizes; the middle k-2 bins have uniform width over the remaining range.
/// Requires k > 2 and enough sizes to populate the tails plus a non-empty
/// middle. If all middle sizes are equal the middle collapses to a single
/// point bin (3 bins total).
SizeHistogram rectified_histogram(std::vector<double> sizes, std::size_t k);
SizeHistogram rectified_histogram(const DatasetAnnotations& ds, std::size_t k,
                                  SizeFilter filter = {});

/// Plain histogram: k uniform-width bins over [min, max].
SizeHistogram uniform_histogram(std::vector<double> sizes, std::size_t k);

/// Fraction of bins whose probability is at most 1/(alpha*k).
double sparse_rate(const SizeHistogram& h, double alpha = 10.0);

/// Piecewise-linear CDF. xs is non-decreasing (equal consecutive xs encode a
/// jump), fs is non-decreasing with fs.front()=0 and fs.back()=1.
struct EmpiricalCdf {
  std::vector<double> xs;
  std::vector<double> fs;

  double min_support() const { return xs.front(); }
  double max_support() const { return xs.back(); }

  /// F(s); 0 below the support, 1 above it. Right-continuous at jumps.
  double eval(double s) const;

  /// inf{x : F(x) >= q} for q in [0,1].
  double quantile(double q) const;
};

/// CDF of the sample set: linear between sorted support points, with a left
/// anchor pinning F(min)=0. A single-valued sample set yields a step.
EmpiricalCdf empirical_cdf(std::vector<double> sizes);

/// CDF of a histogram: each bin's mass spread uniformly over its range.
EmpiricalCdf histogram_cdf(const SizeHistogram& h);

struct AnchorClusters {
  std::vector<double> sizes;   // ascending
  std::vector<double> ratios;  // ascending
};

/// Seeded 1-D k-means (k-means++ init, Lloyd iterations) over a value list.
/// Values are sorted first, so the result is invariant to input permutation.
std::vector<double> kmeans_1d(std::vector<double> values, std::size_t k, std::uint64_t seed);

/// Clusters absolute sizes and aspect ratios (w/h) of person boxes
/// independently; centers returned ascending.
AnchorClusters cluster_anchors(const DatasetAnnotations& ds, std::size_t k_sizes,
                               std::size_t k_ratios, std::uint64_t seed);

struct MomentSummary {
  double mean = 0, stddev = 0;
  std::size_t n = 0;
};

struct DatasetStats {
  MomentSummary absolute_size;
  MomentSummary relative_size;
  MomentSummary aspect_ratio;
};

DatasetStats dataset_stats(const DatasetAnnotations& ds, SizeFilter filter = {});

}  // namespace scalematch
