#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "scalematch/dataset.hpp"

namespace scalematch {

/// Distribution over object sizes (absolute size in pixels).
struct SizeLaw {
  enum class Kind { uniform, lognormal, point_mass, mixture };

  Kind kind = Kind::point_mass;
  double a = 0, b = 0;  // uniform: [a,b]; lognormal: (mu=a, sigma=b); point_mass: a
  std::vector<std::pair<double, SizeLaw>> components;  // mixture weights + laws

  static SizeLaw make_uniform(double lo, double hi);
  static SizeLaw make_lognormal(double mu, double sigma);
  static SizeLaw make_point(double s);
  static SizeLaw make_mixture(std::vector<std::pair<double, SizeLaw>> components);

  double sample(std::mt19937_64& rng) const;
};

struct AspectLaw {
  enum class Kind { fixed, uniform };

  Kind kind = Kind::fixed;
  double a = 1, b = 1;  // fixed: ratio a; uniform: [a,b]

  static AspectLaw make_fixed(double r) { return {Kind::fixed, r, r}; }
  static AspectLaw make_uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }

  double sample(std::mt19937_64& rng) const;
};

struct SynthSpec {
  std::size_t n_images = 100;
  int boxes_min = 1, boxes_max = 1;  // boxes per image, uniform in [min, max]
  SizeLaw size_law = SizeLaw::make_lognormal(std::log(18.0), 0.8);
  AspectLaw aspect_law = AspectLaw::make_fixed(1.0);
  double image_w = 1920, image_h = 1080;
  double ignore_fraction = 0.0;  // fraction of boxes emitted as ignore regions
  std::uint64_t seed = 0;
  std::string name = "synthetic";
};

/// Deterministic synthetic dataset: boxes placed uniformly at random fully
/// inside image bounds, absolute size drawn from size_law, aspect ratio from
/// aspect_law. Throws InfeasiblePlacement when a drawn box cannot fit.
DatasetAnnotations generate(const SynthSpec& spec);

/// Writes a flat-gray PNG for every image record (pixel-path tests only).
void write_blank_images(const DatasetAnnotations& ds, const std::string& dir,
                        unsigned char gray = 128);

}  // namespace scalematch
