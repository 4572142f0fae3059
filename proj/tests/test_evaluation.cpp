#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "scalematch/errors.hpp"
#include "scalematch/evaluation.hpp"
#include "scalematch/size_stats.hpp"
#include "support.hpp"

using namespace scalematch;
using namespace testsupport;

namespace {

const SizeInterval kAll{"all", 2, std::numeric_limits<double>::infinity()};
const SizeInterval kTiny{"tiny", 2, 20};

DatasetAnnotations one_image_dataset(std::vector<BoxRecord> boxes, double dim = 160) {
  DatasetAnnotations ds;
  ds.name = "eval";
  ds.images = {{1, dim, dim, "", {}}};
  ds.boxes = std::move(boxes);
  return ds;
}

bool reports_equal_ignoring_ignored_count(const EvalReport& a, const EvalReport& b) {
  if (a.cells.size() != b.cells.size()) return false;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const auto& ca = a.cells[i];
    const auto& cb = b.cells[i];
    const bool ap_equal = (std::isnan(ca.ap) && std::isnan(cb.ap)) || ca.ap == cb.ap;
    const bool mr_equal = (std::isnan(ca.mr) && std::isnan(cb.mr)) || ca.mr == cb.mr;
    if (!ap_equal || !mr_equal) return false;
    if (ca.tp != cb.tp || ca.fp != cb.fp || ca.fn != cb.fn || ca.n_gt != cb.n_gt) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("iou and iod basics") {
  CHECK(iou(Box{0, 0, 10, 10}, Box{5, 0, 10, 10}) == doctest::Approx(1.0 / 3.0));
  CHECK(iou(Box{0, 0, 10, 10}, Box{0, 0, 10, 10}) == doctest::Approx(1.0));
  CHECK(iou(Box{0, 0, 10, 10}, Box{50, 50, 10, 10}) == 0.0);

  CHECK(iod(Box{2, 2, 4, 4}, Box{0, 0, 20, 20}) == doctest::Approx(1.0));
  CHECK(iod(Box{0, 0, 10, 10}, Box{5, 0, 10, 10}) == doctest::Approx(0.5));
  CHECK(iod(Box{0, 0, 10, 10}, Box{50, 50, 10, 10}) == 0.0);
}

TEST_CASE("a close detection is a true positive") {
  std::vector<BoxRecord> gts = {{1, 1, 50, 50, 10, 10, Category::person, false}};
  std::vector<Detection> dets = {{1, 52, 50, 10, 10, 0.9}};
  REQUIRE(iou(dets[0].box(), gts[0].box()) > 0.5);
  const auto m = match_image(dets, gts, 0.5, kTiny, true);
  CHECK(m.det_labels[0] == DetLabel::tp);
  CHECK(m.gt_labels[0] == GtLabel::matched);
}

TEST_CASE("detections inside ignore regions are neither TP nor FP") {
  std::vector<BoxRecord> gts = {{1, 1, 20, 20, 60, 60, Category::ignore_region, false}};
  std::vector<Detection> dets = {{1, 30, 30, 10, 10, 0.9}};
  const auto m = match_image(dets, gts, 0.5, kTiny, true);
  CHECK(m.det_labels[0] == DetLabel::ignored);
}

TEST_CASE("out-of-partition ground truth absorbs matching detections") {
  // size 25 person lies outside tiny [2, 20)
  std::vector<BoxRecord> gts = {{1, 1, 50, 50, 25, 25, Category::person, false}};
  std::vector<Detection> dets = {{1, 50, 50, 25, 25, 0.9}};
  const auto m = match_image(dets, gts, 0.5, kTiny, true);
  CHECK(m.det_labels[0] == DetLabel::ignored);
  CHECK(m.gt_labels[0] == GtLabel::out_of_range);

  const auto m_all = match_image(dets, gts, 0.5, kAll, true);
  CHECK(m_all.det_labels[0] == DetLabel::tp);
}

TEST_CASE("iou ties break toward the earlier ground-truth id") {
  // two identical GT boxes; one detection equal to both
  std::vector<BoxRecord> gts = {{7, 1, 50, 50, 10, 10, Category::person, false},
                                {3, 1, 50, 50, 10, 10, Category::person, false}};
  std::vector<Detection> dets = {{1, 50, 50, 10, 10, 0.9}};
  const auto m = match_image(dets, gts, 0.5, kAll, true);
  CHECK(m.det_matched_gt[0] == 1);  // index of gt id 3
}

TEST_CASE("uncertain boxes behave exactly like ignore regions when configured") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    auto inst = make_match_instance(seed, true);
    // flip every ignore region into an uncertain person and compare matches
    auto gts_uncertain = inst.gts;
    for (auto& g : gts_uncertain)
      if (g.category == Category::ignore_region) {
        g.category = Category::person;
        g.uncertain = true;
      }
    for (double thr : {0.25, 0.5, 0.75}) {
      const auto a = match_image(inst.dets, inst.gts, thr, kAll, true);
      const auto b = match_image(inst.dets, gts_uncertain, thr, kAll, true);
      CHECK(a.det_labels == b.det_labels);
    }
  }
}

TEST_CASE("average precision hand-traced example") {
  // 1 GT; an FP at score 0.9 and a TP at 0.5: precision at full recall is
  // 0.5 and the envelope makes AP 0.5
  std::vector<ScoredLabel> labels = {{0.9, false}, {0.5, true}};
  CHECK(average_precision(labels, 1) == doctest::Approx(0.5));

  CHECK(average_precision({{0.9, true}}, 1) == doctest::Approx(1.0));
  CHECK(average_precision({}, 1) == 0.0);
  CHECK(std::isnan(average_precision({{0.9, true}}, 0)));
}

TEST_CASE("miss rate hand-traced example") {
  // 2 GT in one image; a TP at 0.9, an FP at 0.8, one GT never found:
  // miss rate is 0.5 at every reachable FPPI point
  std::vector<ScoredLabel> labels = {{0.9, true}, {0.8, false}};
  CHECK(miss_rate(labels, 2, 1, default_fppi_points()) == doctest::Approx(0.5));

  CHECK(miss_rate({{0.9, true}, {0.8, true}}, 2, 1, default_fppi_points()) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(miss_rate({}, 2, 1, default_fppi_points()) == doctest::Approx(1.0));
}

TEST_CASE("evaluate endpoints: perfect and empty detection sets") {
  std::vector<BoxRecord> gts;
  std::int64_t id = 1;
  for (double s : {4.0, 10.0, 16.0, 25.0, 40.0}) {
    BoxRecord b;
    b.id = id;
    b.image_id = 1;
    b.x = 10.0 + 25.0 * static_cast<double>(id);
    b.y = 20.0;
    b.w = s;
    b.h = s;
    gts.push_back(b);
    ++id;
  }
  const auto ds = one_image_dataset(gts, 400);

  DetectionSet perfect;
  for (const auto& b : gts) perfect.detections.push_back({1, b.x, b.y, b.w, b.h, 1.0});
  const auto report = evaluate(perfect, ds);
  for (const auto& cell : report.cells) {
    if (cell.n_gt == 0) {
      CHECK(std::isnan(cell.ap));
      continue;
    }
    CHECK(cell.ap == doctest::Approx(1.0));
    CHECK(cell.mr <= 1e-9);
    CHECK(cell.tp == cell.n_gt);
    CHECK(cell.fn == 0);
  }

  const auto empty_report = evaluate(DetectionSet{}, ds);
  for (const auto& cell : empty_report.cells) {
    if (cell.n_gt == 0) continue;
    CHECK(cell.ap == 0.0);
    CHECK(cell.mr == doctest::Approx(1.0));
    CHECK(cell.tp == 0);
    CHECK(cell.fn == cell.n_gt);
  }
}

TEST_CASE("detections for unknown images are rejected") {
  const auto ds = one_image_dataset({});
  DetectionSet dets;
  dets.detections = {{42, 0, 0, 5, 5, 0.5}};
  CHECK_THROWS_AS(evaluate(dets, ds), ImageIdMismatch);
}

TEST_CASE("greedy matcher equals the exhaustive oracle on random instances") {
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    auto inst = make_match_instance(seed);
    auto dets = inst.dets;
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
    std::vector<Box> targets;
    for (const auto& g : inst.gts)
      if (g.category == Category::person) targets.push_back(g.box());
    for (double thr : {0.25, 0.5, 0.75}) {
      const auto oracle = oracle_prefix_max_tp(dets, targets, thr);
      const auto m = match_image(dets, inst.gts, thr, kAll, true);
      int tp = 0;
      for (std::size_t i = 0; i < dets.size(); ++i) {
        if (m.det_labels[i] == DetLabel::tp) ++tp;
        REQUIRE(tp == oracle[i + 1]);
      }
    }
  }
}

TEST_CASE("TP+FN equals the in-partition ground truth on random instances") {
  for (std::uint64_t seed = 500; seed < 600; ++seed) {
    auto inst = make_match_instance(seed, true);
    DetectionSet dets;
    dets.detections = inst.dets;
    const auto report = evaluate(dets, one_image_dataset(inst.gts));
    for (const auto& cell : report.cells) {
      CHECK(cell.tp + cell.fn == cell.n_gt);
      if (cell.n_gt > 0) {
        CHECK(cell.ap >= 0.0);
        CHECK(cell.ap <= 1.0);
        CHECK(cell.mr >= 0.0);
        CHECK(cell.mr <= 1.0);
      }
    }
  }
}

TEST_CASE("detections absorbed by ignore regions change no cell") {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    auto inst = make_match_instance(seed, true);
    std::vector<BoxRecord> regions;
    for (const auto& g : inst.gts)
      if (g.category == Category::ignore_region) regions.push_back(g);
    if (regions.empty()) continue;

    DetectionSet base;
    base.detections = inst.dets;
    const auto ds = one_image_dataset(inst.gts);
    const auto before = evaluate(base, ds);

    DetectionSet extended = base;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& r : regions) {
      Detection d;
      d.image_id = 1;
      d.w = std::max(2.0, r.w * 0.4);
      d.h = std::max(2.0, r.h * 0.4);
      d.x = r.x + unit(rng) * (r.w - d.w);
      d.y = r.y + unit(rng) * (r.h - d.h);
      d.score = unit(rng);
      extended.detections.push_back(d);  // fully inside: IOD = 1 at any threshold
    }
    const auto after = evaluate(extended, ds);
    CHECK(reports_equal_ignoring_ignored_count(before, after));
  }
}

TEST_CASE("removing an FP never lowers AP; adding a TP never raises MR") {
  int mutations = 0;
  for (std::uint64_t seed = 300; seed < 400 && mutations < 60; ++seed) {
    auto inst = make_match_instance(seed);
    const auto ds = one_image_dataset(inst.gts);
    DetectionSet dets;
    dets.detections = inst.dets;
    const auto base = evaluate(dets, ds);

    const SizeInterval all = kAll;
    const auto m = match_image(inst.dets, inst.gts, 0.5, all, true);
    // remove one FP
    for (std::size_t i = 0; i < inst.dets.size(); ++i) {
      if (m.det_labels[i] != DetLabel::fp) continue;
      DetectionSet fewer;
      for (std::size_t j = 0; j < inst.dets.size(); ++j)
        if (j != i) fewer.detections.push_back(inst.dets[j]);
      const auto report = evaluate(fewer, ds);
      for (std::size_t c = 0; c < report.cells.size(); ++c) {
        if (base.cells[c].n_gt == 0) continue;
        if (base.cells[c].iou_threshold != 0.5) continue;
        CHECK(report.cells[c].ap >= base.cells[c].ap - 1e-12);
      }
      ++mutations;
      break;
    }
    // add a perfect detection for one missed GT
    for (std::size_t g = 0; g < inst.gts.size(); ++g) {
      if (m.gt_labels[g] != GtLabel::missed) continue;
      DetectionSet more;
      more.detections = inst.dets;
      more.detections.push_back(
          {1, inst.gts[g].x, inst.gts[g].y, inst.gts[g].w, inst.gts[g].h, 1.0});
      const auto report = evaluate(more, ds);
      for (std::size_t c = 0; c < report.cells.size(); ++c) {
        if (base.cells[c].n_gt == 0) continue;
        if (base.cells[c].iou_threshold != 0.5) continue;
        CHECK(report.cells[c].mr <= base.cells[c].mr + 1e-12);
      }
      ++mutations;
      break;
    }
  }
  CHECK(mutations >= 20);
}

TEST_CASE("evaluation is deterministic") {
  auto inst = make_match_instance(971, true);
  DetectionSet dets;
  dets.detections = inst.dets;
  const auto ds = one_image_dataset(inst.gts);
  const auto a = evaluate(dets, ds);
  const auto b = evaluate(dets, ds);
  REQUIRE(a.cells.size() == b.cells.size());
  CHECK(reports_equal_ignoring_ignored_count(a, b));
}

TEST_CASE("report json and table render") {
  auto inst = make_match_instance(42, true);
  DetectionSet dets;
  dets.detections = inst.dets;
  const auto report = evaluate(dets, one_image_dataset(inst.gts));

  testsupport::TempDir dir("sm-report");
  save_report(report, dir.file("report.json"));
  std::ostringstream table;
  render_report(report, table);
  CHECK(table.str().find("tiny") != std::string::npos);
  CHECK(table.str().find("AP@0.5") != std::string::npos);
}
