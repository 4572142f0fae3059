#include "scalematch/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "scalematch/errors.hpp"
#include "scalematch/size_stats.hpp"
#include "scalematch/util.hpp"

namespace scalematch {

using json = nlohmann::ordered_json;

std::vector<SizeInterval> default_size_partitions() {
  const double inf = std::numeric_limits<double>::infinity();
  return {{"tiny1", 2, 8}, {"tiny2", 8, 12},  {"tiny3", 12, 20},
          {"tiny", 2, 20}, {"small", 20, 32}, {"all", 2, inf}};
}

std::vector<double> default_fppi_points() {
  std::vector<double> pts;
  for (int i = 0; i < 9; ++i) pts.push_back(std::pow(10.0, -2.0 + 0.25 * i));
  return pts;
}

ImageMatch match_image(std::span<const Detection> dets, std::span<const BoxRecord> gts,
                       double iou_threshold, const SizeInterval& partition,
                       bool uncertain_as_ignore) {
  enum class Role { target, ignore_iod, ignore_iou };
  std::vector<Role> roles(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const BoxRecord& gt = gts[g];
    if (gt.category == Category::ignore_region || (uncertain_as_ignore && gt.uncertain))
      roles[g] = Role::ignore_iod;
    else if (partition.contains(absolute_size(gt)))
      roles[g] = Role::target;
    else
      roles[g] = Role::ignore_iou;  // real person outside the evaluated size range
  }

  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  ImageMatch result;
  result.det_labels.assign(dets.size(), DetLabel::fp);
  result.det_matched_gt.assign(dets.size(), -1);
  result.gt_labels.assign(gts.size(), GtLabel::not_target);

  std::vector<bool> gt_taken(gts.size(), false);
  for (std::size_t i : order) {
    const Box db = dets[i].box();
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (roles[g] != Role::target || gt_taken[g]) continue;
      const double v = iou(db, gts[g].box());
      if (v < iou_threshold) continue;
      if (best < 0 || v > best_iou ||
          (v == best_iou && gts[g].id < gts[static_cast<std::size_t>(best)].id)) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      gt_taken[static_cast<std::size_t>(best)] = true;
      result.det_labels[i] = DetLabel::tp;
      result.det_matched_gt[i] = best;
    }
  }

  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (result.det_labels[i] == DetLabel::tp) continue;
    const Box db = dets[i].box();
    bool absorbed = false;
    for (std::size_t g = 0; g < gts.size() && !absorbed; ++g) {
      if (roles[g] == Role::ignore_iod)
        absorbed = iod(db, gts[g].box()) >= iou_threshold;
      else if (roles[g] == Role::ignore_iou)
        absorbed = iou(db, gts[g].box()) >= iou_threshold;
    }
    if (absorbed) result.det_labels[i] = DetLabel::ignored;
  }

  for (std::size_t g = 0; g < gts.size(); ++g) {
    switch (roles[g]) {
      case Role::target:
        result.gt_labels[g] = gt_taken[g] ? GtLabel::matched : GtLabel::missed;
        break;
      case Role::ignore_iou:
        result.gt_labels[g] = GtLabel::out_of_range;
        break;
      case Role::ignore_iod:
        result.gt_labels[g] = GtLabel::not_target;
        break;
    }
  }
  return result;
}

namespace {

void sort_by_score_desc(std::vector<ScoredLabel>& labels) {
  std::stable_sort(labels.begin(), labels.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });
}

}  // namespace

double average_precision(std::vector<ScoredLabel> labels, std::int64_t n_gt,
                         std::vector<PrPoint>* curve) {
  if (n_gt <= 0) return std::numeric_limits<double>::quiet_NaN();
  sort_by_score_desc(labels);

  std::vector<double> recall, precision;
  recall.reserve(labels.size());
  precision.reserve(labels.size());
  std::int64_t tp = 0, fp = 0;
  for (const auto& l : labels) {
    l.tp ? ++tp : ++fp;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  if (curve) {
    curve->clear();
    for (std::size_t i = 0; i < labels.size(); ++i)
      curve->push_back({labels[i].score, recall[i], precision[i]});
  }
  // precision envelope, then area under the stepwise curve
  for (std::size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

double miss_rate(std::vector<ScoredLabel> labels, std::int64_t n_gt, std::int64_t n_images,
                 const std::vector<double>& fppi_points) {
  if (n_gt <= 0 || n_images <= 0) return std::numeric_limits<double>::quiet_NaN();
  sort_by_score_desc(labels);

  // operating points over score-sorted prefixes, starting from "no detections"
  std::vector<double> fppi{0.0}, miss{1.0};
  std::int64_t tp = 0, fp = 0;
  for (const auto& l : labels) {
    l.tp ? ++tp : ++fp;
    fppi.push_back(static_cast<double>(fp) / static_cast<double>(n_images));
    miss.push_back(1.0 - static_cast<double>(tp) / static_cast<double>(n_gt));
  }

  double log_sum = 0.0;
  for (double ref : fppi_points) {
    // the longest prefix (lowest threshold) whose FPPI stays within ref;
    // unreachable references reuse the final prefix
    const auto it = std::upper_bound(fppi.begin(), fppi.end(), ref);
    const std::size_t idx = static_cast<std::size_t>(it - fppi.begin()) - 1;
    log_sum += std::log(std::max(miss[idx], 1e-10));
  }
  return std::exp(log_sum / static_cast<double>(fppi_points.size()));
}

EvalReport evaluate(const DetectionSet& dets, const DatasetAnnotations& gt,
                    const EvalConfig& cfg) {
  const auto index = gt.image_index();
  std::unordered_map<std::int64_t, std::vector<Detection>> dets_by_image;
  for (const auto& d : dets.detections) {
    if (!index.count(d.image_id))
      throw ImageIdMismatch("evaluate: detection references unknown image " +
                            std::to_string(d.image_id));
    dets_by_image[d.image_id].push_back(d);
  }
  std::unordered_map<std::int64_t, std::vector<BoxRecord>> gts_by_image;
  for (const auto& b : gt.boxes) gts_by_image[b.image_id].push_back(b);

  std::vector<std::int64_t> image_ids;
  image_ids.reserve(gt.images.size());
  for (const auto& img : gt.images) image_ids.push_back(img.id);
  std::sort(image_ids.begin(), image_ids.end());

  EvalReport report;
  report.config = cfg;
  report.n_images = static_cast<std::int64_t>(gt.images.size());

  static const std::vector<Detection> kNoDets;
  static const std::vector<BoxRecord> kNoGts;
  for (const auto& part : cfg.partitions) {
    for (double thr : cfg.iou_thresholds) {
      EvalCell cell;
      cell.partition = part.name;
      cell.size_lo = part.lo;
      cell.size_hi = part.hi;
      cell.iou_threshold = thr;

      std::vector<ScoredLabel> labels;
      for (std::int64_t id : image_ids) {
        const auto dit = dets_by_image.find(id);
        const auto git = gts_by_image.find(id);
        const auto& image_dets = dit != dets_by_image.end() ? dit->second : kNoDets;
        const auto& image_gts = git != gts_by_image.end() ? git->second : kNoGts;
        const ImageMatch m =
            match_image(image_dets, image_gts, thr, part, cfg.uncertain_as_ignore);
        for (std::size_t i = 0; i < image_dets.size(); ++i) {
          switch (m.det_labels[i]) {
            case DetLabel::tp:
              ++cell.tp;
              labels.push_back({image_dets[i].score, true});
              break;
            case DetLabel::fp:
              ++cell.fp;
              labels.push_back({image_dets[i].score, false});
              break;
            case DetLabel::ignored:
              ++cell.n_ignored_dets;
              break;
          }
        }
        for (const GtLabel gl : m.gt_labels)
          if (gl == GtLabel::matched || gl == GtLabel::missed) ++cell.n_gt;
      }
      cell.fn = cell.n_gt - cell.tp;
      cell.ap = average_precision(labels, cell.n_gt, &cell.pr_curve);
      cell.mr = miss_rate(labels, cell.n_gt, report.n_images, cfg.fppi_points);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

namespace {

std::string pct(double v) {
  if (std::isnan(v)) return "-";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v * 100.0;
  return ss.str();
}

}  // namespace

void render_report(const EvalReport& report, std::ostream& out) {
  const auto& thrs = report.config.iou_thresholds;
  out << std::left << std::setw(10) << "partition";
  for (double t : thrs) {
    std::ostringstream h;
    h << "AP@" << t;
    out << std::right << std::setw(10) << h.str();
  }
  for (double t : thrs) {
    std::ostringstream h;
    h << "MR@" << t;
    out << std::right << std::setw(10) << h.str();
  }
  out << std::right << std::setw(10) << "GT" << "\n";

  for (const auto& part : report.config.partitions) {
    out << std::left << std::setw(10) << part.name;
    std::int64_t n_gt = 0;
    for (double t : thrs) {
      for (const auto& c : report.cells)
        if (c.partition == part.name && c.iou_threshold == t) {
          out << std::right << std::setw(10) << pct(c.ap);
          n_gt = c.n_gt;
        }
    }
    for (double t : thrs) {
      for (const auto& c : report.cells)
        if (c.partition == part.name && c.iou_threshold == t)
          out << std::right << std::setw(10) << pct(c.mr);
    }
    out << std::right << std::setw(10) << n_gt << "\n";
  }
}

void save_report(const EvalReport& report, const std::string& path) {
  json j;
  j["n_images"] = report.n_images;
  json cfg;
  cfg["iou_thresholds"] = report.config.iou_thresholds;
  cfg["fppi_points"] = report.config.fppi_points;
  cfg["uncertain_as_ignore"] = report.config.uncertain_as_ignore;
  json parts = json::array();
  for (const auto& p : report.config.partitions) {
    json jp;
    jp["name"] = p.name;
    jp["lo"] = p.lo;
    jp["hi"] = std::isinf(p.hi) ? json() : json(p.hi);
    parts.push_back(std::move(jp));
  }
  cfg["partitions"] = std::move(parts);
  j["config"] = std::move(cfg);

  json cells = json::array();
  for (const auto& c : report.cells) {
    json jc;
    jc["partition"] = c.partition;
    jc["size_lo"] = c.size_lo;
    jc["size_hi"] = std::isinf(c.size_hi) ? json() : json(c.size_hi);
    jc["iou_threshold"] = c.iou_threshold;
    jc["ap"] = std::isnan(c.ap) ? json() : json(c.ap);
    jc["mr"] = std::isnan(c.mr) ? json() : json(c.mr);
    jc["tp"] = c.tp;
    jc["fp"] = c.fp;
    jc["fn"] = c.fn;
    jc["n_gt"] = c.n_gt;
    jc["n_ignored_dets"] = c.n_ignored_dets;
    cells.push_back(std::move(jc));
  }
  j["cells"] = std::move(cells);
  atomic_write_text(path, j.dump(1));
}

}  // namespace scalematch
