#pragma once

// Test-only helpers: independent oracles (kept free of the library's
// implementation paths) plus deterministic instance generators.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "scalematch/dataset.hpp"
#include "scalematch/geometry.hpp"

namespace testsupport {

using scalematch::Box;
using scalematch::BoxRecord;
using scalematch::Category;
using scalematch::DatasetAnnotations;
using scalematch::Detection;
using scalematch::ImageRecord;

// ---------------------------------------------------------------------------
// Exact 1-Wasserstein distance between two empirical distributions:
// integral of |Fa - Fb| over the merged support.
inline double wasserstein1(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> grid;
  grid.reserve(a.size() + b.size());
  grid.insert(grid.end(), a.begin(), a.end());
  grid.insert(grid.end(), b.begin(), b.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double dist = 0.0;
  std::size_t ia = 0, ib = 0;
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    while (ia < a.size() && a[ia] <= grid[g]) ++ia;
    while (ib < b.size() && b[ib] <= grid[g]) ++ib;
    const double fa = static_cast<double>(ia) / na;
    const double fb = static_cast<double>(ib) / nb;
    dist += std::abs(fa - fb) * (grid[g + 1] - grid[g]);
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / static_cast<double>(a.size()) -
                             static_cast<double>(ib) / static_cast<double>(b.size())));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Exhaustive matching oracle. For detections processed in descending-score
// order, prefix_max_tp[i] is the maximum number of detection-GT pairs with
// IoU >= threshold achievable using only the first i detections, computed by
// dynamic programming over every subset of ground-truth boxes.
inline std::vector<int> oracle_prefix_max_tp(const std::vector<Detection>& dets_sorted,
                                             const std::vector<Box>& targets, double threshold) {
  const std::size_t n_gt = targets.size();
  std::vector<unsigned> edges(dets_sorted.size(), 0);
  for (std::size_t i = 0; i < dets_sorted.size(); ++i)
    for (std::size_t g = 0; g < n_gt; ++g)
      if (scalematch::iou(dets_sorted[i].box(), targets[g]) >= threshold)
        edges[i] |= 1u << g;

  std::vector<int> dp(1u << n_gt, -1);
  dp[0] = 0;
  std::vector<int> prefix_max_tp(dets_sorted.size() + 1, 0);
  int best = 0;
  for (std::size_t i = 0; i < dets_sorted.size(); ++i) {
    auto next = dp;
    for (unsigned mask = 0; mask < dp.size(); ++mask) {
      if (dp[mask] < 0) continue;
      unsigned avail = edges[i] & ~mask;
      while (avail) {
        const unsigned g = avail & (~avail + 1);  // lowest set bit
        avail ^= g;
        next[mask | g] = std::max(next[mask | g], dp[mask] + 1);
      }
    }
    dp = std::move(next);
    for (int v : dp) best = std::max(best, v);
    prefix_max_tp[i + 1] = best;
  }
  return prefix_max_tp;
}

// ---------------------------------------------------------------------------
// Random single-image matching instances: ground truth with limited mutual
// overlap, detections made of jittered ground-truth copies plus clutter.
struct MatchInstance {
  std::vector<BoxRecord> gts;   // person boxes, may include ignore regions
  std::vector<Detection> dets;  // one image, image_id 1
  double canvas = 160.0;
};

inline MatchInstance make_match_instance(std::uint64_t seed, bool with_ignore_regions = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MatchInstance inst;

  const int n_gt = 1 + static_cast<int>(unit(rng) * 8.0);  // 1..8
  std::int64_t next_id = 1;
  for (int g = 0; g < n_gt && static_cast<int>(inst.gts.size()) < 8; ++g) {
    for (int attempt = 0; attempt < 60; ++attempt) {
      const double s = 8.0 + unit(rng) * 32.0;
      const double r = 0.6 + unit(rng) * 1.0;
      const double w = s * std::sqrt(r), h = s / std::sqrt(r);
      if (w > inst.canvas || h > inst.canvas) continue;
      BoxRecord b;
      b.id = next_id;
      b.image_id = 1;
      b.w = w;
      b.h = h;
      b.x = unit(rng) * (inst.canvas - w);
      b.y = unit(rng) * (inst.canvas - h);
      bool ok = true;
      for (const auto& other : inst.gts)
        if (scalematch::iou(b.box(), other.box()) > 0.1) ok = false;
      if (!ok) continue;
      b.id = next_id++;
      inst.gts.push_back(b);
      break;
    }
  }
  if (with_ignore_regions) {
    // one or two ignore regions placed clear of every person box
    const int n_ign = 1 + static_cast<int>(unit(rng) * 2.0);
    for (int k = 0; k < n_ign; ++k) {
      for (int attempt = 0; attempt < 60; ++attempt) {
        BoxRecord b;
        b.id = next_id;
        b.image_id = 1;
        b.w = 20 + unit(rng) * 40.0;
        b.h = 20 + unit(rng) * 40.0;
        b.x = unit(rng) * (inst.canvas - b.w);
        b.y = unit(rng) * (inst.canvas - b.h);
        b.category = Category::ignore_region;
        bool ok = true;
        for (const auto& other : inst.gts)
          if (scalematch::intersection_area(b.box(), other.box()) > 0) ok = false;
        if (!ok) continue;
        b.id = next_id++;
        inst.gts.push_back(b);
        break;
      }
    }
  }

  // jittered copies of the person boxes
  for (const auto& gt : inst.gts) {
    if (gt.category != Category::person) continue;
    if (unit(rng) > 0.8) continue;  // missed object
    Detection d;
    d.image_id = 1;
    const double scale = 0.9 + unit(rng) * 0.2;
    d.w = gt.w * scale;
    d.h = gt.h * scale;
    d.x = gt.x + (unit(rng) - 0.5) * 0.3 * gt.w;
    d.y = gt.y + (unit(rng) - 0.5) * 0.3 * gt.h;
    d.score = unit(rng);
    inst.dets.push_back(d);
  }
  // clutter: plausible single-object false positives, never a box that
  // bridges two ground-truth objects at once
  const int n_noise = static_cast<int>(unit(rng) * 3.0);
  for (int k = 0; k < n_noise && inst.dets.size() < 8; ++k) {
    for (int attempt = 0; attempt < 60; ++attempt) {
      Detection d;
      d.image_id = 1;
      const double s = 8.0 + unit(rng) * 32.0;
      d.w = s;
      d.h = s * (0.7 + unit(rng) * 0.6);
      d.x = unit(rng) * (inst.canvas - d.w);
      d.y = unit(rng) * (inst.canvas - d.h);
      d.score = unit(rng);
      int touched = 0;
      for (const auto& gt : inst.gts)
        if (gt.category == Category::person && scalematch::iou(d.box(), gt.box()) >= 0.2)
          ++touched;
      if (touched > 1) continue;
      inst.dets.push_back(d);
      break;
    }
  }
  while (inst.dets.size() > 8) inst.dets.pop_back();
  return inst;
}

// ---------------------------------------------------------------------------
// RAII temp directory under the system temp path.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directory(path_, ec)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport
