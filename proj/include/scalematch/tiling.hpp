#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <opencv2/core.hpp>

#include "scalematch/dataset.hpp"

namespace scalematch {

struct TileSpec {
  int tile_w = 0, tile_h = 0, overlap = 0;
  std::vector<std::pair<int, int>> offsets;  // (ox, oy), row-major
};

/// Tile origins along both axes: 0, stride, 2*stride, ... with the final
/// offset clamped so the last tile ends at the image edge. stride =
/// tile - overlap. An image no larger than the tile yields a single tile.
TileSpec plan_tiles(const ImageRecord& img, int tile_w, int tile_h, int overlap);

struct TileRecord {
  std::int64_t tile_id = 0;
  std::int64_t parent_image_id = 0;
  int offset_x = 0, offset_y = 0;
  double width = 0, height = 0;
  bool pure_background = false;  // no person target assigned
};

struct TileProvenance {
  int tile_w = 0, tile_h = 0, overlap = 0;
  std::vector<TileRecord> tiles;
};

struct TiledDataset {
  DatasetAnnotations dataset;
  TileProvenance provenance;
};

struct TileOptions {
  int tile_w = 1000, tile_h = 1000, overlap = 100;
  double assign_min_area_fraction = 0.5;
  bool pixels = false;
  std::string image_dir_in;
  std::string image_dir_out;
  // fill ignore regions in tile pixels with this RGB value when set
  bool fill_ignore = false;
  std::array<double, 3> fill_value = {0, 0, 0};
  int workers = 0;
};

/// Cuts every image into overlapping tiles. A person box is assigned to a
/// tile when at least assign_min_area_fraction of its area lies inside
/// (clipped and rebased to tile coordinates; ties assign to all qualifying
/// tiles); smaller intersections become ignore regions. Ignore regions are
/// carried into every tile they touch.
TiledDataset cut_dataset(const DatasetAnnotations& ds, const TileOptions& options = {});

/// Sets all pixels inside the given boxes to the RGB fill value.
void fill_ignore_regions(cv::Mat& image, std::span<const Box> regions,
                         const std::array<double, 3>& fill_rgb);

/// Per-channel RGB mean over every pixel of every image in the dataset.
std::array<double, 3> mean_pixel_value(const DatasetAnnotations& ds, const std::string& image_dir);

/// Greedy NMS over one image's detections: descending score, suppress
/// IoU > threshold. Returns survivors in descending-score order.
std::vector<Detection> greedy_nms(std::vector<Detection> dets, double iou_threshold);

/// Maps tile detections back to original-image coordinates via provenance,
/// merges duplicates with NMS per original image, then applies the cap.
DetectionSet merge_detections(const DetectionSet& tile_dets, const TileProvenance& provenance,
                              double nms_iou = 0.5, int cap_per_image = 200);

void save_provenance(const TileProvenance& p, const std::string& path);
TileProvenance load_provenance(const std::string& path);

}  // namespace scalematch
