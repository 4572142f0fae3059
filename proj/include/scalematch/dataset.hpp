#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scalematch/geometry.hpp"

namespace scalematch {

enum class Category { person, ignore_region };

/// One annotated object. Ignore regions share the record type; `uncertain`
/// marks annotations that are not confidently a person.
struct BoxRecord {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  double x = 0, y = 0, w = 0, h = 0;
  Category category = Category::person;
  bool uncertain = false;

  Box box() const { return {x, y, w, h}; }
  bool is_person() const { return category == Category::person; }

  bool operator==(const BoxRecord&) const = default;
};

/// Width/height are kept real-valued: scale transforms multiply them by
/// arbitrary ratios and the annotation-only path must not round.
struct ImageRecord {
  std::int64_t id = 0;
  double width = 0, height = 0;
  std::string file_name;
  std::optional<std::string> source_video;

  bool operator==(const ImageRecord&) const = default;
};

struct DatasetAnnotations {
  std::string name;
  std::vector<ImageRecord> images;  // canonical order: ascending id
  std::vector<BoxRecord> boxes;     // canonical order: ascending id

  bool operator==(const DatasetAnnotations&) const = default;

  std::unordered_map<std::int64_t, std::size_t> image_index() const;
  std::unordered_map<std::int64_t, std::vector<const BoxRecord*>> boxes_by_image() const;
};

struct Detection {
  std::int64_t image_id = 0;
  double x = 0, y = 0, w = 0, h = 0;
  double score = 0;

  Box box() const { return {x, y, w, h}; }
  bool operator==(const Detection&) const = default;
};

struct DetectionSet {
  std::vector<Detection> detections;
  int cap_per_image = 200;
};

enum class AnnotationFormat { coco_json };

/// Parses a COCO-style annotation file. Ignore/uncertain flags come from the
/// per-annotation `ignore`/`uncertain` attributes (iscrowd also maps to
/// ignore). Boxes overhanging image bounds are clipped with a warning; boxes
/// with non-positive size are rejected.
DatasetAnnotations load_annotations(const std::string& path,
                                    AnnotationFormat format = AnnotationFormat::coco_json);

/// Emits the dataset deterministically (images/annotations sorted by id).
/// load_annotations(save_annotations(ds)) reproduces ds field for field.
void save_annotations(const DatasetAnnotations& ds, const std::string& path);

/// Reads a detection-result file: a JSON array of {image_id, bbox, score}.
/// Applies the per-image cap (descending score, ties by input order).
DetectionSet load_detections(const std::string& path, int cap_per_image = 200);

void save_detections(const DetectionSet& dets, const std::string& path);

/// Keeps at most cap_per_image detections per image, by descending score,
/// ties broken by input order; survivors keep their input order.
void apply_detection_cap(DetectionSet& ds);

/// Checks referential integrity, id uniqueness and box bounds; throws
/// SchemaError / DanglingReference on violations.
void validate(const DatasetAnnotations& ds);

}  // namespace scalematch
