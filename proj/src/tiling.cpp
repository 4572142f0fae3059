#include "scalematch/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>
#include <opencv2/imgproc.hpp>

#include "scalematch/errors.hpp"
#include "scalematch/pixels.hpp"
#include "scalematch/util.hpp"

namespace scalematch {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::vector<int> axis_offsets(double dim, int tile, int stride) {
  const int idim = static_cast<int>(std::llround(std::ceil(dim)));
  if (idim <= tile) return {0};
  std::vector<int> offsets;
  for (int o = 0; o + tile <= idim; o += stride) offsets.push_back(o);
  if (offsets.back() + tile < idim) offsets.push_back(idim - tile);
  return offsets;
}

}  // namespace

TileSpec plan_tiles(const ImageRecord& img, int tile_w, int tile_h, int overlap) {
  if (tile_w < 1 || tile_h < 1)
    throw InvalidOverlap("plan_tiles: tile dimensions must be >= 1");
  if (overlap < 0 || overlap >= std::min(tile_w, tile_h))
    throw InvalidOverlap("plan_tiles: overlap " + std::to_string(overlap) +
                         " must satisfy 0 <= overlap < min(tile_w, tile_h)");
  TileSpec spec;
  spec.tile_w = tile_w;
  spec.tile_h = tile_h;
  spec.overlap = overlap;
  const auto xs = axis_offsets(img.width, tile_w, tile_w - overlap);
  const auto ys = axis_offsets(img.height, tile_h, tile_h - overlap);
  for (int oy : ys)
    for (int ox : xs) spec.offsets.emplace_back(ox, oy);
  return spec;
}

namespace {

std::string tile_file_name(const ImageRecord& parent, int ox, int oy) {
  std::string stem = fs::path(parent.file_name).stem().string();
  if (stem.empty()) stem = "img" + std::to_string(parent.id);
  return stem + "_x" + std::to_string(ox) + "_y" + std::to_string(oy) + ".png";
}

// clip box to the tile rect and rebase to tile coordinates
Box clip_to_tile(const Box& b, double ox, double oy, double tw, double th) {
  if (b.x >= ox && b.y >= oy && b.x2() <= ox + tw && b.y2() <= oy + th)
    return {b.x - ox, b.y - oy, b.w, b.h};  // wholly inside: keep size exact
  const double nx = std::max(b.x, ox);
  const double ny = std::max(b.y, oy);
  const double nx2 = std::min(b.x2(), ox + tw);
  const double ny2 = std::min(b.y2(), oy + th);
  return {nx - ox, ny - oy, nx2 - nx, ny2 - ny};
}

}  // namespace

TiledDataset cut_dataset(const DatasetAnnotations& ds, const TileOptions& options) {
  TiledDataset out;
  out.dataset.name = ds.name + "_tiles";
  out.provenance.tile_w = options.tile_w;
  out.provenance.tile_h = options.tile_h;
  out.provenance.overlap = options.overlap;

  const auto by_image = ds.boxes_by_image();
  auto images = ds.images;
  std::sort(images.begin(), images.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.id < b.id; });

  std::int64_t next_tile_id = 1;
  std::int64_t next_box_id = 1;
  // (tile index, parent index, roi) jobs for the pixel pass
  struct PixelJob {
    std::size_t parent_index = 0;
    std::size_t tile_index = 0;
    int ox = 0, oy = 0, w = 0, h = 0;
    std::vector<Box> fill_boxes;
  };
  std::vector<PixelJob> jobs;

  for (std::size_t pi = 0; pi < images.size(); ++pi) {
    const ImageRecord& img = images[pi];
    const TileSpec spec = plan_tiles(img, options.tile_w, options.tile_h, options.overlap);
    const auto boxes_it = by_image.find(img.id);

    for (const auto& [ox, oy] : spec.offsets) {
      const double tw = std::min<double>(options.tile_w, img.width - ox);
      const double th = std::min<double>(options.tile_h, img.height - oy);

      ImageRecord tile;
      tile.id = next_tile_id++;
      tile.width = tw;
      tile.height = th;
      tile.file_name = tile_file_name(img, ox, oy);
      tile.source_video = img.source_video;

      TileRecord rec;
      rec.tile_id = tile.id;
      rec.parent_image_id = img.id;
      rec.offset_x = ox;
      rec.offset_y = oy;
      rec.width = tw;
      rec.height = th;

      std::vector<Box> fill_boxes;
      bool has_target = false;
      if (boxes_it != by_image.end()) {
        for (const BoxRecord* b : boxes_it->second) {
          const Box clipped = clip_to_tile(b->box(), ox, oy, tw, th);
          if (clipped.w <= 0 || clipped.h <= 0) continue;
          const double inter = clipped.area();
          BoxRecord nb;
          nb.image_id = tile.id;
          nb.x = clipped.x;
          nb.y = clipped.y;
          nb.w = clipped.w;
          nb.h = clipped.h;
          if (b->category == Category::ignore_region) {
            nb.category = Category::ignore_region;
          } else if (inter / b->box().area() >= options.assign_min_area_fraction) {
            nb.category = Category::person;
            nb.uncertain = b->uncertain;
            if (!nb.uncertain) has_target = true;
          } else {
            // a truncated person must never count as background
            nb.category = Category::ignore_region;
          }
          nb.id = next_box_id++;
          if (nb.category == Category::ignore_region || nb.uncertain)
            fill_boxes.push_back(nb.box());
          out.dataset.boxes.push_back(nb);
        }
      }
      rec.pure_background = !has_target;
      out.provenance.tiles.push_back(rec);
      out.dataset.images.push_back(tile);

      if (options.pixels) {
        PixelJob job;
        job.parent_index = pi;
        job.tile_index = out.dataset.images.size() - 1;
        job.ox = ox;
        job.oy = oy;
        job.w = static_cast<int>(std::llround(tw));
        job.h = static_cast<int>(std::llround(th));
        if (options.fill_ignore) job.fill_boxes = std::move(fill_boxes);
        jobs.push_back(std::move(job));
      }
    }
  }

  if (options.pixels) {
    fs::create_directories(options.image_dir_out);
    // group jobs per parent so each source image is decoded once
    std::vector<std::vector<std::size_t>> per_parent(images.size());
    for (std::size_t j = 0; j < jobs.size(); ++j) per_parent[jobs[j].parent_index].push_back(j);
    parallel_for(images.size(), options.workers, [&](std::size_t pi) {
      if (per_parent[pi].empty()) return;
      const fs::path in_path = fs::path(options.image_dir_in) / images[pi].file_name;
      const cv::Mat mat = load_image(in_path.string());
      for (std::size_t j : per_parent[pi]) {
        const PixelJob& job = jobs[j];
        cv::Mat tile_mat = mat(cv::Rect(job.ox, job.oy, job.w, job.h)).clone();
        if (options.fill_ignore)
          fill_ignore_regions(tile_mat, job.fill_boxes, options.fill_value);
        const fs::path out_path =
            fs::path(options.image_dir_out) / out.dataset.images[job.tile_index].file_name;
        save_image_atomic(out_path.string(), tile_mat);
      }
    });
  }
  return out;
}

void fill_ignore_regions(cv::Mat& image, std::span<const Box> regions,
                         const std::array<double, 3>& fill_rgb) {
  const cv::Scalar fill(fill_rgb[2], fill_rgb[1], fill_rgb[0]);  // BGR storage
  for (const Box& b : regions) {
    const int x0 = std::clamp<int>(static_cast<int>(std::llround(b.x)), 0, image.cols);
    const int y0 = std::clamp<int>(static_cast<int>(std::llround(b.y)), 0, image.rows);
    const int x1 = std::clamp<int>(static_cast<int>(std::llround(b.x2())), 0, image.cols);
    const int y1 = std::clamp<int>(static_cast<int>(std::llround(b.y2())), 0, image.rows);
    if (x1 <= x0 || y1 <= y0) continue;
    image(cv::Rect(x0, y0, x1 - x0, y1 - y0)).setTo(fill);
  }
}

std::array<double, 3> mean_pixel_value(const DatasetAnnotations& ds, const std::string& image_dir) {
  double sum_b = 0, sum_g = 0, sum_r = 0, total = 0;
  for (const auto& img : ds.images) {
    const cv::Mat mat = load_image((fs::path(image_dir) / img.file_name).string());
    const cv::Scalar m = cv::mean(mat);
    const double npix = static_cast<double>(mat.total());
    sum_b += m[0] * npix;
    sum_g += m[1] * npix;
    sum_r += m[2] * npix;
    total += npix;
  }
  if (total <= 0) throw EmptyInput("mean_pixel_value: dataset has no images");
  return {sum_r / total, sum_g / total, sum_b / total};
}

std::vector<Detection> greedy_nms(std::vector<Detection> dets, double iou_threshold) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  std::vector<Detection> kept;
  std::vector<bool> suppressed(dets.size(), false);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(dets[i]);
    for (std::size_t j = i + 1; j < dets.size(); ++j) {
      if (suppressed[j]) continue;
      if (iou(dets[i].box(), dets[j].box()) > iou_threshold) suppressed[j] = true;
    }
  }
  return kept;
}

DetectionSet merge_detections(const DetectionSet& tile_dets, const TileProvenance& provenance,
                              double nms_iou, int cap_per_image) {
  std::unordered_map<std::int64_t, const TileRecord*> tiles;
  tiles.reserve(provenance.tiles.size());
  for (const auto& t : provenance.tiles) tiles.emplace(t.tile_id, &t);

  std::unordered_map<std::int64_t, std::vector<Detection>> per_image;
  for (const auto& d : tile_dets.detections) {
    auto it = tiles.find(d.image_id);
    if (it == tiles.end())
      throw UnknownTile("merge_detections: detection references unknown tile " +
                        std::to_string(d.image_id));
    Detection moved = d;
    moved.image_id = it->second->parent_image_id;
    moved.x += it->second->offset_x;
    moved.y += it->second->offset_y;
    per_image[moved.image_id].push_back(moved);
  }

  std::vector<std::int64_t> image_ids;
  image_ids.reserve(per_image.size());
  for (const auto& [id, _] : per_image) image_ids.push_back(id);
  std::sort(image_ids.begin(), image_ids.end());

  DetectionSet out;
  out.cap_per_image = cap_per_image;
  for (std::int64_t id : image_ids) {
    auto kept = greedy_nms(std::move(per_image[id]), nms_iou);
    if (cap_per_image > 0 && kept.size() > static_cast<std::size_t>(cap_per_image))
      kept.resize(static_cast<std::size_t>(cap_per_image));
    out.detections.insert(out.detections.end(), kept.begin(), kept.end());
  }
  return out;
}

void save_provenance(const TileProvenance& p, const std::string& path) {
  json j;
  j["tile_w"] = p.tile_w;
  j["tile_h"] = p.tile_h;
  j["overlap"] = p.overlap;
  json tiles = json::array();
  for (const auto& t : p.tiles) {
    json jt;
    jt["tile_id"] = t.tile_id;
    jt["parent_image_id"] = t.parent_image_id;
    jt["offset_x"] = t.offset_x;
    jt["offset_y"] = t.offset_y;
    jt["width"] = t.width;
    jt["height"] = t.height;
    jt["pure_background"] = t.pure_background;
    tiles.push_back(std::move(jt));
  }
  j["tiles"] = std::move(tiles);
  atomic_write_text(path, j.dump(1));
}

TileProvenance load_provenance(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("tiles") || !j["tiles"].is_array())
    throw SchemaError(path + ": missing 'tiles' array");
  TileProvenance p;
  p.tile_w = j.value("tile_w", 0);
  p.tile_h = j.value("tile_h", 0);
  p.overlap = j.value("overlap", 0);
  for (const auto& jt : j["tiles"]) {
    TileRecord t;
    if (!jt.contains("tile_id") || !jt.contains("parent_image_id"))
      throw SchemaError(path + ": tile entry missing ids");
    t.tile_id = jt["tile_id"].get<std::int64_t>();
    t.parent_image_id = jt["parent_image_id"].get<std::int64_t>();
    t.offset_x = jt.value("offset_x", 0);
    t.offset_y = jt.value("offset_y", 0);
    t.width = jt.value("width", 0.0);
    t.height = jt.value("height", 0.0);
    t.pure_background = jt.value("pure_background", false);
    p.tiles.push_back(t);
  }
  return p;
}

}  // namespace scalematch
