#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "scalematch/errors.hpp"
#include "scalematch/size_stats.hpp"
#include "scalematch/synth.hpp"
#include "support.hpp"

using namespace scalematch;

namespace {

// independent re-statement of the bin boundary convention, used as the
// assignment oracle: right-open bins, a closed right edge makes the next
// bin open on the left
int bins_containing(const SizeHistogram& h, double s) {
  int count = 0;
  for (std::size_t i = 0; i < h.k(); ++i) {
    const bool open_left = i > 0 && h.bins[i - 1].closed_right;
    const bool lo_ok = open_left ? s > h.bins[i].lo : s >= h.bins[i].lo;
    const bool hi_ok = h.bins[i].closed_right ? s <= h.bins[i].hi : s < h.bins[i].hi;
    if (lo_ok && hi_ok) ++count;
  }
  return count;
}

std::vector<double> lognormal_sizes(std::size_t n, double mu, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> law(mu, sigma);
  std::vector<double> sizes(n);
  for (auto& s : sizes) s = law(rng);
  return sizes;
}

}  // namespace

TEST_CASE("absolute and relative size") {
  BoxRecord b;
  b.w = 9;
  b.h = 16;
  CHECK(absolute_size(b) == doctest::Approx(12.0));
  b.w = b.h = 5;
  CHECK(absolute_size(b) == doctest::Approx(5.0));
  b.w = b.h = 18;
  CHECK(absolute_size(b) == doctest::Approx(18.0));

  ImageRecord img;
  img.width = img.height = 100;
  b.w = b.h = 10;
  CHECK(relative_size(b, img) == doctest::Approx(0.1));
  b.w = 100;
  b.h = 100;
  CHECK(relative_size(b, img) == doctest::Approx(1.0));
  img.width = img.height = 400;
  b.w = 2;
  b.h = 8;
  CHECK(relative_size(b, img) == doctest::Approx(0.01));
}

TEST_CASE("rectified histogram hand-traced example") {
  const std::vector<double> sizes = {1, 2, 3, 4, 5, 6, 7, 8, 9, 100};
  const auto h = rectified_histogram(sizes, 4);
  REQUIRE(h.k() == 4);
  CHECK(h.count == 10);
  CHECK(h.probs[0] == 0.3);
  CHECK(h.probs[1] == 0.2);
  CHECK(h.probs[2] == 0.2);
  CHECK(h.probs[3] == 0.3);
  CHECK(h.bins[0].lo == 1.0);
  CHECK(h.bins[0].hi == 4.0);
  CHECK_FALSE(h.bins[0].closed_right);
  CHECK(h.bins[1].lo == 4.0);
  CHECK(h.bins[1].hi == 5.5);
  CHECK_FALSE(h.bins[1].closed_right);
  CHECK(h.bins[2].lo == 5.5);
  CHECK(h.bins[2].hi == 7.0);
  CHECK(h.bins[2].closed_right);
  CHECK(h.bins[3].lo == 7.0);
  CHECK(h.bins[3].hi == 100.0);
  CHECK(h.bins[3].closed_right);
}

TEST_CASE("degenerate middle support collapses to a point bin") {
  const std::vector<double> sizes(10, 10.0);
  const auto h = rectified_histogram(sizes, 3);
  REQUIRE(h.k() == 3);
  const double tail = std::ceil(10.0 / 3.0);
  CHECK(h.probs[0] == doctest::Approx(tail / 10.0));
  CHECK(h.probs[1] == doctest::Approx(1.0 - 2.0 * tail / 10.0));
  CHECK(h.probs[2] == doctest::Approx(tail / 10.0));
  CHECK(h.bins[1].lo == 10.0);
  CHECK(h.bins[1].hi == 10.0);
  const double sum = std::accumulate(h.probs.begin(), h.probs.end(), 0.0);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform data fills bins evenly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> law(2.0, 20.0);
  std::vector<double> sizes(1000);
  for (auto& s : sizes) s = law(rng);
  const auto h = rectified_histogram(sizes, 100);
  double sum = 0.0;
  for (double p : h.probs) {
    CHECK(p == doctest::Approx(0.01).epsilon(1.0));  // within a factor of two
    sum += p;
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("probabilities sum to one on random datasets") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed * 77 + 5);
    const std::size_t n = 50 + static_cast<std::size_t>(rng() % 3000);
    const std::size_t k = 3 + static_cast<std::size_t>(rng() % 120);
    if (n < 2 * ((n + k - 1) / k) + 1) continue;
    auto sizes = lognormal_sizes(n, 2.0 + 0.01 * static_cast<double>(seed), 0.7, seed);
    const auto h = rectified_histogram(sizes, k);
    const double sum = std::accumulate(h.probs.begin(), h.probs.end(), 0.0);
    CHECK(std::abs(sum - 1.0) < 1e-9);

    // every input size falls in exactly one bin
    for (double s : sizes) {
      CHECK(bins_containing(h, s) == 1);
      CHECK(h.bin_index(s).has_value());
    }
  }
}

TEST_CASE("insufficient data is reported") {
  CHECK_THROWS_AS(rectified_histogram(std::vector<double>{1, 2}, 4), InsufficientData);
  // n >= k but the index-cut tails would leave no middle
  CHECK_THROWS_AS(rectified_histogram(std::vector<double>{1, 2, 3, 4}, 3), InsufficientData);
  CHECK_THROWS_AS(rectified_histogram(std::vector<double>{}, 3), InsufficientData);
}

TEST_CASE("sparse rate") {
  SizeHistogram uniform;
  uniform.probs.assign(100, 0.01);
  for (int i = 0; i < 100; ++i) uniform.bins.push_back({double(i), double(i + 1), i == 99});
  CHECK(sparse_rate(uniform, 10.0) == 0.0);

  SizeHistogram mixed;
  for (int i = 0; i < 100; ++i) mixed.bins.push_back({double(i), double(i + 1), i == 99});
  mixed.probs.assign(100, 0.0);
  // 33 bins below the 1/(alpha*K)=0.001 threshold, the rest carry the mass
  for (int i = 0; i < 33; ++i) mixed.probs[i] = 0.0005;
  const double rest = (1.0 - 33 * 0.0005) / 67.0;
  for (int i = 33; i < 100; ++i) mixed.probs[i] = rest;
  CHECK(sparse_rate(mixed, 10.0) == doctest::Approx(0.33));

  SizeHistogram point;
  point.probs = {1.0};
  point.bins = {{5, 5, true}};
  CHECK(sparse_rate(point, 10.0) == 0.0);
}

TEST_CASE("rectified histogram is less sparse than the plain one on heavy tails") {
  auto sizes = lognormal_sizes(10000, std::log(18.0), 0.8, 99);
  const auto rect = rectified_histogram(sizes, 100);
  const auto plain = uniform_histogram(sizes, 100);
  CHECK(sparse_rate(rect, 10.0) <= sparse_rate(plain, 10.0));
  CHECK(sparse_rate(plain, 10.0) > 0.3);  // the long tail leaves many near-empty bins
}

TEST_CASE("empirical cdf interpolates ranks") {
  const auto cdf = empirical_cdf({1, 2, 3, 4});
  CHECK(cdf.eval(2.5) == doctest::Approx(0.5));
  CHECK(cdf.eval(1.0) == doctest::Approx(0.0));
  CHECK(cdf.eval(4.0) == doctest::Approx(1.0));
  CHECK(cdf.eval(0.0) == 0.0);
  CHECK(cdf.eval(9.0) == 1.0);
}

TEST_CASE("empirical cdf of a point mass is a step") {
  const auto cdf = empirical_cdf({7, 7, 7});
  CHECK(cdf.eval(6.999) == 0.0);
  CHECK(cdf.eval(7.0) == 1.0);
  CHECK(cdf.quantile(0.5) == 7.0);
}

TEST_CASE("empirical cdf tracks the analytic cdf of uniform samples") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> law(0.0, 100.0);
  std::vector<double> sizes(100000);
  for (auto& s : sizes) s = law(rng);
  const auto cdf = empirical_cdf(sizes);
  double sup = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double s = 100.0 * i / 10000.0;
    sup = std::max(sup, std::abs(cdf.eval(s) - s / 100.0));
  }
  CHECK(sup < 0.01);
}

TEST_CASE("empirical cdf rejects empty input") {
  CHECK_THROWS_AS(empirical_cdf({}), EmptyInput);
}

TEST_CASE("histogram cdf spreads mass uniformly within bins") {
  SizeHistogram h;
  h.probs = {0.5, 0.5};
  h.bins = {{0, 10, false}, {10, 20, true}};
  const auto cdf = histogram_cdf(h);
  CHECK(cdf.eval(5.0) == doctest::Approx(0.25));
  CHECK(cdf.eval(0.0) == doctest::Approx(0.0));
  CHECK(cdf.eval(20.0) == doctest::Approx(1.0));
  CHECK(cdf.quantile(0.25) == doctest::Approx(5.0));
  CHECK(cdf.quantile(0.0) == 0.0);
  CHECK(cdf.quantile(1.0) == 20.0);
}

TEST_CASE("cdfs are monotone at every support point") {
  auto sizes = lognormal_sizes(5000, 2.5, 0.9, 4);
  const auto ecdf = empirical_cdf(sizes);
  for (std::size_t i = 1; i < ecdf.fs.size(); ++i) {
    CHECK(ecdf.fs[i] >= ecdf.fs[i - 1]);
    CHECK(ecdf.xs[i] >= ecdf.xs[i - 1]);
  }
  const auto hcdf = histogram_cdf(rectified_histogram(sizes, 64));
  for (std::size_t i = 1; i < hcdf.fs.size(); ++i) {
    CHECK(hcdf.fs[i] >= hcdf.fs[i - 1]);
    CHECK(hcdf.xs[i] >= hcdf.xs[i - 1]);
  }
}

TEST_CASE("k-means splits well-separated pairs") {
  const auto centers = kmeans_1d({8, 9, 30, 31}, 2, 0);
  REQUIRE(centers.size() == 2);
  CHECK(centers[0] == doctest::Approx(8.5));
  CHECK(centers[1] == doctest::Approx(30.5));

  const auto one = kmeans_1d({0.5, 0.5, 0.5}, 1, 0);
  CHECK(one[0] == doctest::Approx(0.5));
}

TEST_CASE("cluster_anchors is deterministic and permutation invariant") {
  SynthSpec spec;
  spec.n_images = 200;
  spec.boxes_min = 1;
  spec.boxes_max = 4;
  spec.aspect_law = AspectLaw::make_uniform(0.4, 2.0);
  spec.seed = 5;
  auto ds = generate(spec);

  const auto a = cluster_anchors(ds, 5, 3, 42);
  const auto b = cluster_anchors(ds, 5, 3, 42);
  CHECK(a.sizes == b.sizes);
  CHECK(a.ratios == b.ratios);

  // permuting the boxes must not change the clusters
  auto shuffled = ds;
  std::mt19937_64 rng(9);
  std::shuffle(shuffled.boxes.begin(), shuffled.boxes.end(), rng);
  const auto c = cluster_anchors(shuffled, 5, 3, 42);
  CHECK(a.sizes == c.sizes);
  CHECK(a.ratios == c.ratios);

  for (std::size_t i = 1; i < a.sizes.size(); ++i) CHECK(a.sizes[i] >= a.sizes[i - 1]);
  DatasetAnnotations tiny;
  tiny.images = {{1, 100, 100, "", {}}};
  tiny.boxes = {{1, 1, 0, 0, 5, 5, Category::person, false}};
  CHECK_THROWS_AS(cluster_anchors(tiny, 5, 3, 0), InsufficientData);
}

TEST_CASE("dataset stats summarize person boxes") {
  DatasetAnnotations ds;
  ds.name = "s";
  ds.images = {{1, 100, 100, "", {}}};
  ds.boxes = {{1, 1, 0, 0, 9, 16, Category::person, false},
              {2, 1, 0, 0, 5, 5, Category::person, false},
              {3, 1, 0, 0, 50, 50, Category::ignore_region, false},
              {4, 1, 0, 0, 40, 40, Category::person, true}};
  const auto stats = dataset_stats(ds);
  CHECK(stats.absolute_size.n == 2);
  CHECK(stats.absolute_size.mean == doctest::Approx((12.0 + 5.0) / 2.0));
  CHECK(stats.aspect_ratio.mean == doctest::Approx((9.0 / 16.0 + 1.0) / 2.0));

  const auto with_unc = dataset_stats(ds, {false, true});
  CHECK(with_unc.absolute_size.n == 3);
}
