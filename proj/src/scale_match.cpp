#include "scalematch/scale_match.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "scalematch/errors.hpp"
#include "scalematch/pixels.hpp"
#include "scalematch/util.hpp"

namespace scalematch {

using json = nlohmann::ordered_json;

double sample_target_size(const SizeHistogram& h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cum = 0.0;
  std::size_t bin = h.k() - 1;  // residual float mass falls into the last bin
  for (std::size_t i = 0; i < h.k(); ++i) {
    cum += h.probs[i];
    if (u < cum) {
      bin = i;
      break;
    }
  }
  const HistBin& r = h.bins[bin];
  if (r.hi <= r.lo) return r.lo;
  return r.lo + unit(rng) * (r.hi - r.lo);
}

namespace {

struct ImageMeanSize {
  std::int64_t image_id = 0;
  double mean = 0;  // 0 when the image has no person boxes
  bool has_boxes = false;
};

std::vector<ImageMeanSize> mean_person_sizes(const DatasetAnnotations& ds) {
  const auto by_image = ds.boxes_by_image();
  SizeFilter filter;
  std::vector<ImageMeanSize> means;
  means.reserve(ds.images.size());
  for (const auto& img : ds.images) {
    ImageMeanSize m{img.id, 0.0, false};
    double sum = 0.0;
    std::size_t n = 0;
    if (auto it = by_image.find(img.id); it != by_image.end()) {
      for (const BoxRecord* b : it->second) {
        if (!filter.accepts(*b)) continue;
        sum += absolute_size(*b);
        ++n;
      }
    }
    if (n > 0) {
      m.mean = sum / static_cast<double>(n);
      m.has_boxes = true;
    }
    means.push_back(m);
  }
  std::sort(means.begin(), means.end(),
            [](const ImageMeanSize& a, const ImageMeanSize& b) { return a.image_id < b.image_id; });
  return means;
}

ScalePlanEntry make_entry(const ImageMeanSize& m, double target, double clamp_min,
                          double clamp_max) {
  ScalePlanEntry e;
  e.image_id = m.image_id;
  if (!m.has_boxes) return e;  // pass-through: ratio 1, sizes recorded as 0
  e.mean_size = m.mean;
  e.target_size = target;
  const double raw = target / m.mean;
  e.ratio = std::clamp(raw, clamp_min, clamp_max);
  e.clamped = e.ratio != raw;
  return e;
}

}  // namespace

ScalePlan build_scale_plan(const DatasetAnnotations& source, const SizeHistogram& target_hist,
                           std::uint64_t seed, double clamp_min, double clamp_max) {
  if (source.images.empty()) throw EmptySource("build_scale_plan: source has no images");
  ScalePlan plan;
  plan.mode = ScaleMode::scale_match;
  plan.seed = seed;
  plan.clamp_min = clamp_min;
  plan.clamp_max = clamp_max;

  std::mt19937_64 rng(seed);
  for (const auto& m : mean_person_sizes(source)) {
    const double target = m.has_boxes ? sample_target_size(target_hist, rng) : 0.0;
    plan.entries.push_back(make_entry(m, target, clamp_min, clamp_max));
  }
  return plan;
}

MonotoneMap build_monotone_map(const std::vector<double>& source_sizes,
                               const SizeHistogram& target_hist) {
  if (source_sizes.empty()) throw EmptyInput("build_monotone_map: no source sizes");
  return MonotoneMap{empirical_cdf(source_sizes), histogram_cdf(target_hist)};
}

ScalePlan build_monotone_plan(const DatasetAnnotations& source, const MonotoneMap& map,
                              double clamp_min, double clamp_max) {
  if (source.images.empty()) throw EmptySource("build_monotone_plan: source has no images");
  ScalePlan plan;
  plan.mode = ScaleMode::monotone;
  plan.clamp_min = clamp_min;
  plan.clamp_max = clamp_max;
  for (const auto& m : mean_person_sizes(source)) {
    const double target = m.has_boxes ? map.map_size(m.mean) : 0.0;
    plan.entries.push_back(make_entry(m, target, clamp_min, clamp_max));
  }
  return plan;
}

DatasetAnnotations apply_scale_plan(const DatasetAnnotations& source, const ScalePlan& plan,
                                    const ApplyOptions& options) {
  std::unordered_map<std::int64_t, const ScalePlanEntry*> by_image;
  by_image.reserve(plan.entries.size());
  for (const auto& e : plan.entries) by_image.emplace(e.image_id, &e);
  for (const auto& img : source.images)
    if (!by_image.count(img.id))
      throw PlanCoverageError("apply_scale_plan: no plan entry for image " +
                              std::to_string(img.id));

  DatasetAnnotations out;
  out.name = source.name;
  out.images = source.images;
  out.boxes = source.boxes;

  std::vector<double> ratios(out.images.size(), 1.0);
  for (std::size_t i = 0; i < out.images.size(); ++i) {
    ImageRecord& img = out.images[i];
    const double c = by_image.at(img.id)->ratio;
    ratios[i] = c;
    if (options.annotations_only) {
      img.width = img.width * c;
      img.height = img.height * c;
    } else {
      img.width = static_cast<double>(std::max<long long>(1, round_half_up(img.width * c)));
      img.height = static_cast<double>(std::max<long long>(1, round_half_up(img.height * c)));
    }
  }
  for (auto& b : out.boxes) {
    const double c = by_image.at(b.image_id)->ratio;
    b.x *= c;
    b.y *= c;
    b.w *= c;
    b.h *= c;
  }

  if (!options.annotations_only) {
    namespace fs = std::filesystem;
    fs::create_directories(options.image_dir_out);
    parallel_for(out.images.size(), options.workers, [&](std::size_t i) {
      const ImageRecord& img = out.images[i];
      const ImageRecord& src_img = source.images[i];
      const fs::path in_path = fs::path(options.image_dir_in) / src_img.file_name;
      const fs::path out_path = fs::path(options.image_dir_out) / src_img.file_name;
      if (src_img.file_name.empty())
        throw MissingImageFile("apply_scale_plan: image " + std::to_string(src_img.id) +
                               " has no file name");
      if (ratios[i] == 1.0) {
        std::error_code ec;
        fs::copy_file(in_path, out_path, fs::copy_options::overwrite_existing, ec);
        if (!ec) return;  // fall through to decode+encode on copy failure
      }
      const cv::Mat mat = load_image(in_path.string());
      const cv::Mat resized =
          resize_image(mat, static_cast<int>(img.width), static_cast<int>(img.height),
                       options.interp == Interp::bilinear);
      save_image_atomic(out_path.string(), resized);
    });
  }
  return out;
}

void save_scale_plan(const ScalePlan& plan, const std::string& path) {
  json j;
  j["mode"] = plan.mode == ScaleMode::scale_match ? "scale_match" : "monotone";
  j["seed"] = plan.seed;
  j["clamp"] = json::array({plan.clamp_min, plan.clamp_max});
  std::size_t clamped = 0, pass_through = 0;
  json entries = json::array();
  for (const auto& e : plan.entries) {
    if (e.clamped) ++clamped;
    if (e.mean_size == 0.0) ++pass_through;
    json je;
    je["image_id"] = e.image_id;
    je["mean_size"] = e.mean_size;
    je["target_size"] = e.target_size;
    je["ratio"] = e.ratio;
    je["clamped"] = e.clamped;
    entries.push_back(std::move(je));
  }
  j["n_images"] = plan.entries.size();
  j["n_clamped"] = clamped;
  j["n_pass_through"] = pass_through;
  j["entries"] = std::move(entries);
  atomic_write_text(path, j.dump(1));
}

}  // namespace scalematch
