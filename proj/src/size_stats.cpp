#include "scalematch/size_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scalematch/errors.hpp"

namespace scalematch {

std::vector<double> collect_sizes(const DatasetAnnotations& ds, SizeFilter filter) {
  std::vector<double> sizes;
  sizes.reserve(ds.boxes.size());
  for (const auto& b : ds.boxes)
    if (filter.accepts(b)) sizes.push_back(absolute_size(b));
  return sizes;
}

namespace {

// A bin following a right-closed bin is open on the left.
bool bin_contains(const std::vector<HistBin>& bins, std::size_t i, double s) {
  const HistBin& b = bins[i];
  const bool open_left = i > 0 && bins[i - 1].closed_right;
  const bool lo_ok = open_left ? s > b.lo : s >= b.lo;
  const bool hi_ok = b.closed_right ? s <= b.hi : s < b.hi;
  return lo_ok && hi_ok;
}

}  // namespace

std::optional<std::size_t> SizeHistogram::bin_index(double s) const {
  for (std::size_t i = 0; i < bins.size(); ++i)
    if (bin_contains(bins, i, s)) return i;
  return std::nullopt;
}

SizeHistogram rectified_histogram(std::vector<double> sizes, std::size_t k) {
  if (k <= 2) throw std::invalid_argument("rectified_histogram: k must be > 2");
  const std::size_t n = sizes.size();
  if (n < k)
    throw InsufficientData("rectified_histogram: " + std::to_string(n) +
                           " sizes for k=" + std::to_string(k));
  std::sort(sizes.begin(), sizes.end());

  const std::size_t tail = (n + k - 1) / k;  // ceil(N/k)
  if (n < 2 * tail + 1)
    throw InsufficientData("rectified_histogram: tails of " + std::to_string(tail) +
                           " leave no middle sizes (n=" + std::to_string(n) + ")");

  const double lo_all = sizes.front();
  const double hi_all = sizes.back();
  const double mid_lo = sizes[tail];          // first size past the small tail
  const double mid_hi = sizes[n - tail - 1];  // last size before the big tail
  const double tail_prob = static_cast<double>(tail) / static_cast<double>(n);

  SizeHistogram h;
  h.count = n;

  if (mid_lo == mid_hi) {
    // Degenerate middle support: collapse to a single point bin.
    h.bins = {{lo_all, mid_lo, false}, {mid_lo, mid_hi, true}, {mid_hi, hi_all, true}};
    h.probs = {tail_prob, static_cast<double>(n - 2 * tail) / static_cast<double>(n), tail_prob};
    return h;
  }

  const std::size_t m = k - 2;  // middle bin count
  const double d = (mid_hi - mid_lo) / static_cast<double>(m);
  h.bins.reserve(k);
  h.bins.push_back({lo_all, mid_lo, false});
  for (std::size_t j = 0; j < m; ++j) {
    const double lo = mid_lo + static_cast<double>(j) * d;
    const double hi = (j + 1 == m) ? mid_hi : mid_lo + static_cast<double>(j + 1) * d;
    h.bins.push_back({lo, hi, j + 1 == m});
  }
  h.bins.push_back({mid_hi, hi_all, true});

  // Tails are cut by index, so equal sizes straddling the cut may land in
  // different bins than their value suggests.
  h.probs.assign(k, 0.0);
  h.probs.front() = tail_prob;
  h.probs.back() = tail_prob;
  std::vector<std::size_t> counts(m, 0);
  for (std::size_t idx = tail; idx + tail < n; ++idx) {
    const double s = sizes[idx];
    auto j = static_cast<std::ptrdiff_t>((s - mid_lo) / d);
    j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(m) - 1);
    // snap to the bin whose range actually contains s (float division can be
    // off by one at bin edges); middle bins are left-closed, right-open
    // except the last
    while (j > 0 && s < h.bins[static_cast<std::size_t>(j) + 1].lo) --j;
    while (j + 1 < static_cast<std::ptrdiff_t>(m) &&
           s >= h.bins[static_cast<std::size_t>(j) + 1].hi)
      ++j;
    ++counts[static_cast<std::size_t>(j)];
  }
  for (std::size_t j = 0; j < m; ++j)
    h.probs[j + 1] = static_cast<double>(counts[j]) / static_cast<double>(n);
  return h;
}

SizeHistogram rectified_histogram(const DatasetAnnotations& ds, std::size_t k, SizeFilter filter) {
  return rectified_histogram(collect_sizes(ds, filter), k);
}

SizeHistogram uniform_histogram(std::vector<double> sizes, std::size_t k) {
  if (k == 0) throw std::invalid_argument("uniform_histogram: k must be >= 1");
  if (sizes.empty()) throw EmptyInput("uniform_histogram: no sizes");
  std::sort(sizes.begin(), sizes.end());
  const double lo = sizes.front(), hi = sizes.back();
  const std::size_t n = sizes.size();

  SizeHistogram h;
  h.count = n;
  if (lo == hi || k == 1) {
    h.bins = {{lo, hi, true}};
    h.probs = {1.0};
    return h;
  }
  const double d = (hi - lo) / static_cast<double>(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double blo = lo + static_cast<double>(j) * d;
    const double bhi = (j + 1 == k) ? hi : lo + static_cast<double>(j + 1) * d;
    h.bins.push_back({blo, bhi, j + 1 == k});
  }
  h.probs.assign(k, 0.0);
  for (double s : sizes) {
    auto j = static_cast<std::ptrdiff_t>((s - lo) / d);
    j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(k) - 1);
    while (j > 0 && s < h.bins[static_cast<std::size_t>(j)].lo) --j;
    while (j + 1 < static_cast<std::ptrdiff_t>(k) && s >= h.bins[static_cast<std::size_t>(j)].hi)
      ++j;
    h.probs[static_cast<std::size_t>(j)] += 1.0;
  }
  for (auto& p : h.probs) p /= static_cast<double>(n);
  return h;
}

double sparse_rate(const SizeHistogram& h, double alpha) {
  const double threshold = 1.0 / (alpha * static_cast<double>(h.k()));
  std::size_t sparse = 0;
  for (double p : h.probs)
    if (p <= threshold) ++sparse;
  return static_cast<double>(sparse) / static_cast<double>(h.k());
}

double EmpiricalCdf::eval(double s) const {
  if (s < xs.front()) return 0.0;
  if (s >= xs.back()) return 1.0;
  // last index with xs[i] <= s; equal consecutive xs encode a jump and the
  // last of them wins (right continuity)
  const auto it = std::upper_bound(xs.begin(), xs.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  if (xs[i] == s) return fs[i];
  const double span = xs[i + 1] - xs[i];
  return fs[i] + (fs[i + 1] - fs[i]) * (s - xs[i]) / span;
}

double EmpiricalCdf::quantile(double q) const {
  q = std::clamp(q, 0.0, 1.0);
  // first index with fs[j] >= q
  const auto it = std::lower_bound(fs.begin(), fs.end(), q);
  std::size_t j = static_cast<std::size_t>(it - fs.begin());
  if (j >= fs.size()) return xs.back();
  if (j == 0 || fs[j] == q) return xs[j];
  if (xs[j] == xs[j - 1]) return xs[j];
  const double rise = fs[j] - fs[j - 1];
  return xs[j - 1] + (xs[j] - xs[j - 1]) * (q - fs[j - 1]) / rise;
}

EmpiricalCdf empirical_cdf(std::vector<double> sizes) {
  if (sizes.empty()) throw EmptyInput("empirical_cdf: no sizes");
  std::sort(sizes.begin(), sizes.end());
  const std::size_t n = sizes.size();

  EmpiricalCdf cdf;
  if (sizes.front() == sizes.back()) {  // point mass: a pure step
    cdf.xs = {sizes.front(), sizes.front()};
    cdf.fs = {0.0, 1.0};
    return cdf;
  }
  const double denom = static_cast<double>(n - 1);
  std::size_t cum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sizes[j] == sizes[i]) ++j;
    cum = j;
    cdf.xs.push_back(sizes[i]);
    cdf.fs.push_back(static_cast<double>(cum - 1) / denom);
    i = j;
  }
  if (cdf.fs.front() > 0.0) {  // duplicated minimum: anchor F(min) = 0 below the jump
    cdf.xs.insert(cdf.xs.begin(), cdf.xs.front());
    cdf.fs.insert(cdf.fs.begin(), 0.0);
  }
  cdf.fs.back() = 1.0;
  return cdf;
}

EmpiricalCdf histogram_cdf(const SizeHistogram& h) {
  EmpiricalCdf cdf;
  cdf.xs.reserve(h.k() + 1);
  cdf.fs.reserve(h.k() + 1);
  cdf.xs.push_back(h.bins.front().lo);
  cdf.fs.push_back(0.0);
  double cum = 0.0;
  for (std::size_t i = 0; i < h.k(); ++i) {
    cum += h.probs[i];
    cdf.xs.push_back(h.bins[i].hi);
    cdf.fs.push_back(std::min(cum, 1.0));
  }
  cdf.fs.back() = 1.0;
  return cdf;
}

std::vector<double> kmeans_1d(std::vector<double> values, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("kmeans_1d: k must be >= 1");
  if (values.size() < k)
    throw InsufficientData("kmeans_1d: " + std::to_string(values.size()) + " values for k=" +
                           std::to_string(k));
  std::sort(values.begin(), values.end());  // permutation invariance
  const std::size_t n = values.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // k-means++ seeding
  std::vector<double> centers;
  centers.reserve(k);
  centers.push_back(values[static_cast<std::size_t>(unit(rng) * static_cast<double>(n)) % n]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (double c : centers) best = std::min(best, (values[i] - c) * (values[i] - c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      // all remaining points coincide with a center
      centers.push_back(values[0]);
      continue;
    }
    double r = unit(rng) * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      r -= d2[i];
      if (r <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(values[pick]);
  }

  std::vector<std::size_t> assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (std::size_t c = 0; c < k; ++c) {
        const double dist = std::abs(values[i] - centers[c]);
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      assign[i] = best;
    }
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[assign[i]] += values[i];
      ++cnt[assign[i]];
    }
    double max_move = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double updated = centers[c];
      if (cnt[c] > 0) {
        updated = sum[c] / static_cast<double>(cnt[c]);
      } else {
        // empty cluster: grab the point farthest from its center
        double worst = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double dist = std::abs(values[i] - centers[assign[i]]);
          if (dist > worst) {
            worst = dist;
            updated = values[i];
          }
        }
      }
      max_move = std::max(max_move, std::abs(updated - centers[c]));
      centers[c] = updated;
    }
    if (max_move < 1e-6) break;
  }
  std::sort(centers.begin(), centers.end());
  return centers;
}

AnchorClusters cluster_anchors(const DatasetAnnotations& ds, std::size_t k_sizes,
                               std::size_t k_ratios, std::uint64_t seed) {
  SizeFilter filter;
  std::vector<double> sizes;
  std::vector<double> ratios;
  for (const auto& b : ds.boxes) {
    if (!filter.accepts(b)) continue;
    sizes.push_back(absolute_size(b));
    ratios.push_back(b.w / b.h);
  }
  if (sizes.size() < std::max(k_sizes, k_ratios))
    throw InsufficientData("cluster_anchors: " + std::to_string(sizes.size()) +
                           " boxes for k=" + std::to_string(std::max(k_sizes, k_ratios)));
  AnchorClusters out;
  out.sizes = kmeans_1d(sizes, k_sizes, seed);
  out.ratios = kmeans_1d(ratios, k_ratios, seed + 1);
  return out;
}

namespace {

MomentSummary summarize(const std::vector<double>& v) {
  MomentSummary s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(v.size()));
  return s;
}

}  // namespace

DatasetStats dataset_stats(const DatasetAnnotations& ds, SizeFilter filter) {
  const auto index = ds.image_index();
  std::vector<double> abs_sizes, rel_sizes, aspects;
  for (const auto& b : ds.boxes) {
    if (!filter.accepts(b)) continue;
    abs_sizes.push_back(absolute_size(b));
    aspects.push_back(b.w / b.h);
    auto it = index.find(b.image_id);
    if (it != index.end()) rel_sizes.push_back(relative_size(b, ds.images[it->second]));
  }
  DatasetStats out;
  out.absolute_size = summarize(abs_sizes);
  out.relative_size = summarize(rel_sizes);
  out.aspect_ratio = summarize(aspects);
  return out;
}

}  // namespace scalematch
