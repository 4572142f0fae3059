#include "scalematch/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "scalematch/errors.hpp"
#include "scalematch/util.hpp"

namespace scalematch {

using json = nlohmann::ordered_json;

std::unordered_map<std::int64_t, std::size_t> DatasetAnnotations::image_index() const {
  std::unordered_map<std::int64_t, std::size_t> index;
  index.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) index.emplace(images[i].id, i);
  return index;
}

std::unordered_map<std::int64_t, std::vector<const BoxRecord*>> DatasetAnnotations::boxes_by_image()
    const {
  std::unordered_map<std::int64_t, std::vector<const BoxRecord*>> by_image;
  by_image.reserve(images.size());
  for (const auto& img : images) by_image[img.id];
  for (const auto& b : boxes) by_image[b.image_id].push_back(&b);
  return by_image;
}

namespace {

double require_number(const json& j, const char* field, const std::string& context) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number())
    throw SchemaError(context + ": missing or non-numeric field '" + field + "'");
  return it->get<double>();
}

std::int64_t require_id(const json& j, const char* field, const std::string& context) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number_integer())
    throw SchemaError(context + ": missing or non-integer field '" + field + "'");
  return it->get<std::int64_t>();
}

bool optional_flag(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) return false;
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_number()) return it->get<double>() != 0;
  return false;
}

// Emit integral values as JSON integers so untouched COCO files stay clean.
json number_out(double v) {
  if (std::isfinite(v) && std::floor(v) == v && std::abs(v) < 9.0e15)
    return json(static_cast<std::int64_t>(v));
  return json(v);
}

json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

DatasetAnnotations load_annotations(const std::string& path, AnnotationFormat format) {
  (void)format;  // coco_json is the only format
  const json j = parse_file(path);
  if (!j.is_object()) throw SchemaError(path + ": top-level value must be an object");
  if (!j.contains("images") || !j["images"].is_array())
    throw SchemaError(path + ": missing 'images' array");
  if (!j.contains("annotations") || !j["annotations"].is_array())
    throw SchemaError(path + ": missing 'annotations' array");

  DatasetAnnotations ds;
  if (j.contains("info") && j["info"].is_object() && j["info"].contains("description") &&
      j["info"]["description"].is_string()) {
    ds.name = j["info"]["description"].get<std::string>();
  } else {
    ds.name = std::filesystem::path(path).stem().string();
  }

  for (const auto& ji : j["images"]) {
    ImageRecord img;
    img.id = require_id(ji, "id", "image");
    const std::string ctx = "image " + std::to_string(img.id);
    img.width = require_number(ji, "width", ctx);
    img.height = require_number(ji, "height", ctx);
    if (img.width < 1 || img.height < 1) throw SchemaError(ctx + ": dimensions must be >= 1");
    if (ji.contains("file_name") && ji["file_name"].is_string())
      img.file_name = ji["file_name"].get<std::string>();
    if (ji.contains("source_video") && ji["source_video"].is_string())
      img.source_video = ji["source_video"].get<std::string>();
    ds.images.push_back(std::move(img));
  }
  std::sort(ds.images.begin(), ds.images.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.id < b.id; });
  const auto index = ds.image_index();
  if (index.size() != ds.images.size()) throw SchemaError(path + ": duplicate image ids");

  std::size_t clipped = 0;
  for (const auto& ja : j["annotations"]) {
    BoxRecord b;
    b.id = require_id(ja, "id", "annotation");
    const std::string ctx = "annotation " + std::to_string(b.id);
    b.image_id = require_id(ja, "image_id", ctx);
    auto bit = ja.find("bbox");
    if (bit == ja.end() || !bit->is_array() || bit->size() != 4)
      throw SchemaError(ctx + ": 'bbox' must be an array of 4 numbers");
    for (const auto& v : *bit)
      if (!v.is_number()) throw SchemaError(ctx + ": 'bbox' must be an array of 4 numbers");
    b.x = (*bit)[0].get<double>();
    b.y = (*bit)[1].get<double>();
    b.w = (*bit)[2].get<double>();
    b.h = (*bit)[3].get<double>();
    if (b.w <= 0 || b.h <= 0) throw SchemaError(ctx + ": non-positive bbox width/height");
    b.category = (optional_flag(ja, "ignore") || optional_flag(ja, "iscrowd"))
                     ? Category::ignore_region
                     : Category::person;
    b.uncertain = optional_flag(ja, "uncertain");

    auto it = index.find(b.image_id);
    if (it == index.end())
      throw DanglingReference(ctx + " references unknown image " + std::to_string(b.image_id));
    const ImageRecord& img = ds.images[it->second];

    // clip real overshoots only; sub-slack float dust is preserved exactly so
    // transformed datasets round-trip bit for bit
    constexpr double kBoundsSlack = 1e-6;
    const double over_x = std::max({-b.x, b.x + b.w - img.width, 0.0});
    const double over_y = std::max({-b.y, b.y + b.h - img.height, 0.0});
    if (over_x > kBoundsSlack || over_y > kBoundsSlack) {
      const double x2 = std::min(b.x + b.w, img.width);
      const double y2 = std::min(b.y + b.h, img.height);
      const double nx = std::max(b.x, 0.0);
      const double ny = std::max(b.y, 0.0);
      if (x2 - nx <= 0 || y2 - ny <= 0) throw SchemaError(ctx + ": box lies outside image bounds");
      ++clipped;
      b.x = nx;
      b.y = ny;
      b.w = x2 - nx;
      b.h = y2 - ny;
    }
    ds.boxes.push_back(b);
  }
  std::sort(ds.boxes.begin(), ds.boxes.end(),
            [](const BoxRecord& a, const BoxRecord& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < ds.boxes.size(); ++i)
    if (ds.boxes[i].id == ds.boxes[i - 1].id)
      throw SchemaError(path + ": duplicate annotation id " + std::to_string(ds.boxes[i].id));

  if (clipped > 0)
    std::cerr << "scalematch: warning: clipped " << clipped
              << " box(es) extending past image bounds in " << path << "\n";
  return ds;
}

void save_annotations(const DatasetAnnotations& ds, const std::string& path) {
  auto images = ds.images;
  std::sort(images.begin(), images.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.id < b.id; });
  auto boxes = ds.boxes;
  std::sort(boxes.begin(), boxes.end(),
            [](const BoxRecord& a, const BoxRecord& b) { return a.id < b.id; });

  json j;
  j["info"] = json::object({{"description", ds.name}});
  j["images"] = json::array();
  for (const auto& img : images) {
    json ji;
    ji["id"] = img.id;
    ji["width"] = number_out(img.width);
    ji["height"] = number_out(img.height);
    ji["file_name"] = img.file_name;
    if (img.source_video) ji["source_video"] = *img.source_video;
    j["images"].push_back(std::move(ji));
  }
  j["annotations"] = json::array();
  for (const auto& b : boxes) {
    json ja;
    ja["id"] = b.id;
    ja["image_id"] = b.image_id;
    ja["category_id"] = 1;
    ja["bbox"] = json::array({number_out(b.x), number_out(b.y), number_out(b.w), number_out(b.h)});
    ja["area"] = number_out(b.w * b.h);
    ja["iscrowd"] = 0;
    ja["ignore"] = b.category == Category::ignore_region;
    ja["uncertain"] = b.uncertain;
    j["annotations"].push_back(std::move(ja));
  }
  j["categories"] = json::array({json::object({{"id", 1}, {"name", "person"}})});
  atomic_write_text(path, j.dump(1));
}

DetectionSet load_detections(const std::string& path, int cap_per_image) {
  const json j = parse_file(path);
  if (!j.is_array()) throw SchemaError(path + ": top-level value must be an array");

  DetectionSet result;
  result.cap_per_image = cap_per_image;
  std::size_t n = 0;
  for (const auto& jd : j) {
    const std::string ctx = path + ": detection " + std::to_string(n++);
    Detection d;
    d.image_id = require_id(jd, "image_id", ctx);
    auto bit = jd.find("bbox");
    if (bit == jd.end() || !bit->is_array() || bit->size() != 4)
      throw SchemaError(ctx + ": 'bbox' must be an array of 4 numbers");
    for (const auto& v : *bit)
      if (!v.is_number()) throw SchemaError(ctx + ": 'bbox' must be an array of 4 numbers");
    d.x = (*bit)[0].get<double>();
    d.y = (*bit)[1].get<double>();
    d.w = (*bit)[2].get<double>();
    d.h = (*bit)[3].get<double>();
    if (d.w <= 0 || d.h <= 0) throw SchemaError(ctx + ": non-positive bbox width/height");
    d.score = require_number(jd, "score", ctx);
    if (d.score < 0 || d.score > 1)
      throw ScoreRangeError(ctx + ": score " + std::to_string(d.score) + " outside [0, 1]");
    result.detections.push_back(d);
  }
  apply_detection_cap(result);
  return result;
}

void save_detections(const DetectionSet& dets, const std::string& path) {
  std::vector<std::size_t> order(dets.detections.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Detection &da = dets.detections[a], &db = dets.detections[b];
    if (da.image_id != db.image_id) return da.image_id < db.image_id;
    return da.score > db.score;
  });
  json j = json::array();
  for (std::size_t i : order) {
    const Detection& d = dets.detections[i];
    json jd;
    jd["image_id"] = d.image_id;
    jd["bbox"] = json::array({number_out(d.x), number_out(d.y), number_out(d.w), number_out(d.h)});
    jd["score"] = d.score;
    j.push_back(std::move(jd));
  }
  atomic_write_text(path, j.dump(1));
}

void apply_detection_cap(DetectionSet& ds) {
  if (ds.cap_per_image <= 0) return;
  const std::size_t cap = static_cast<std::size_t>(ds.cap_per_image);
  std::unordered_map<std::int64_t, std::vector<std::size_t>> per_image;
  for (std::size_t i = 0; i < ds.detections.size(); ++i)
    per_image[ds.detections[i].image_id].push_back(i);

  std::vector<bool> keep(ds.detections.size(), true);
  bool dropped = false;
  for (auto& [image_id, indices] : per_image) {
    if (indices.size() <= cap) continue;
    dropped = true;
    // stable sort keeps input order among equal scores
    std::stable_sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
      return ds.detections[a].score > ds.detections[b].score;
    });
    for (std::size_t r = cap; r < indices.size(); ++r) keep[indices[r]] = false;
  }
  if (!dropped) return;
  std::vector<Detection> kept;
  kept.reserve(ds.detections.size());
  for (std::size_t i = 0; i < ds.detections.size(); ++i)
    if (keep[i]) kept.push_back(ds.detections[i]);
  ds.detections = std::move(kept);
}

void validate(const DatasetAnnotations& ds) {
  const auto index = ds.image_index();
  if (index.size() != ds.images.size())
    throw SchemaError(ds.name + ": duplicate image ids");
  for (const auto& img : ds.images)
    if (img.width < 1 || img.height < 1)
      throw SchemaError(ds.name + ": image " + std::to_string(img.id) + " has dimensions < 1");

  std::unordered_map<std::int64_t, int> box_ids;
  constexpr double kBoundsSlack = 1e-6;
  for (const auto& b : ds.boxes) {
    if (++box_ids[b.id] > 1)
      throw SchemaError(ds.name + ": duplicate box id " + std::to_string(b.id));
    const std::string ctx = ds.name + ": box " + std::to_string(b.id);
    if (b.w <= 0 || b.h <= 0) throw SchemaError(ctx + ": non-positive size");
    auto it = index.find(b.image_id);
    if (it == index.end())
      throw DanglingReference(ctx + " references unknown image " + std::to_string(b.image_id));
    const ImageRecord& img = ds.images[it->second];
    if (b.x < -kBoundsSlack || b.y < -kBoundsSlack ||
        b.x + b.w > img.width + kBoundsSlack || b.y + b.h > img.height + kBoundsSlack)
      throw SchemaError(ctx + ": extends past image bounds");
  }
}

}  // namespace scalematch
