#include "scalematch/synth.hpp"

#include <cmath>
#include <filesystem>

#include <opencv2/core.hpp>

#include "scalematch/errors.hpp"
#include "scalematch/pixels.hpp"

namespace scalematch {

SizeLaw SizeLaw::make_uniform(double lo, double hi) {
  SizeLaw law;
  law.kind = Kind::uniform;
  law.a = lo;
  law.b = hi;
  return law;
}

SizeLaw SizeLaw::make_lognormal(double mu, double sigma) {
  SizeLaw law;
  law.kind = Kind::lognormal;
  law.a = mu;
  law.b = sigma;
  return law;
}

SizeLaw SizeLaw::make_point(double s) {
  SizeLaw law;
  law.kind = Kind::point_mass;
  law.a = s;
  return law;
}

SizeLaw SizeLaw::make_mixture(std::vector<std::pair<double, SizeLaw>> components) {
  SizeLaw law;
  law.kind = Kind::mixture;
  law.components = std::move(components);
  return law;
}

double SizeLaw::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case Kind::uniform:
      return std::uniform_real_distribution<double>(a, b)(rng);
    case Kind::lognormal:
      return std::lognormal_distribution<double>(a, b)(rng);
    case Kind::point_mass:
      return a;
    case Kind::mixture: {
      double total = 0.0;
      for (const auto& [w, _] : components) total += w;
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (const auto& [w, law] : components) {
        r -= w;
        if (r <= 0.0) return law.sample(rng);
      }
      return components.back().second.sample(rng);
    }
  }
  return a;
}

double AspectLaw::sample(std::mt19937_64& rng) const {
  if (kind == Kind::fixed) return a;
  return std::uniform_real_distribution<double>(a, b)(rng);
}

DatasetAnnotations generate(const SynthSpec& spec) {
  if (spec.image_w < 1 || spec.image_h < 1)
    throw std::invalid_argument("generate: image dimensions must be >= 1");
  if (spec.boxes_min < 0 || spec.boxes_max < spec.boxes_min)
    throw std::invalid_argument("generate: invalid boxes_per_image range");
  if (spec.ignore_fraction < 0 || spec.ignore_fraction >= 1)
    throw std::invalid_argument("generate: ignore_fraction must be in [0, 1)");

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> box_count(spec.boxes_min, spec.boxes_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  DatasetAnnotations ds;
  ds.name = spec.name;
  std::int64_t next_box_id = 1;
  char buf[32];
  for (std::size_t i = 0; i < spec.n_images; ++i) {
    ImageRecord img;
    img.id = static_cast<std::int64_t>(i) + 1;
    img.width = spec.image_w;
    img.height = spec.image_h;
    std::snprintf(buf, sizeof(buf), "synth_%06lld.png", static_cast<long long>(img.id));
    img.file_name = buf;
    ds.images.push_back(img);

    const int n_boxes = box_count(rng);
    for (int b = 0; b < n_boxes; ++b) {
      const double s = spec.size_law.sample(rng);
      const double r = spec.aspect_law.sample(rng);
      const double w = s * std::sqrt(r);
      const double h = s / std::sqrt(r);
      if (!(w > 0) || !(h > 0) || w > spec.image_w || h > spec.image_h)
        throw InfeasiblePlacement("generate: box of size " + std::to_string(s) + " (aspect " +
                                  std::to_string(r) + ") does not fit in " +
                                  std::to_string(spec.image_w) + "x" +
                                  std::to_string(spec.image_h));
      BoxRecord box;
      box.id = next_box_id++;
      box.image_id = img.id;
      box.w = w;
      box.h = h;
      box.x = unit(rng) * (spec.image_w - w);
      box.y = unit(rng) * (spec.image_h - h);
      box.category =
          (spec.ignore_fraction > 0 && unit(rng) < spec.ignore_fraction)
              ? Category::ignore_region
              : Category::person;
      ds.boxes.push_back(box);
    }
  }
  return ds;
}

void write_blank_images(const DatasetAnnotations& ds, const std::string& dir, unsigned char gray) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& img : ds.images) {
    const int w = std::max(1, static_cast<int>(std::llround(std::ceil(img.width))));
    const int h = std::max(1, static_cast<int>(std::llround(std::ceil(img.height))));
    cv::Mat mat(h, w, CV_8UC3, cv::Scalar(gray, gray, gray));
    save_image_atomic((fs::path(dir) / img.file_name).string(), mat);
  }
}

}  // namespace scalematch
