#include "scalematch/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scalematch/dataset.hpp"
#include "scalematch/errors.hpp"
#include "scalematch/evaluation.hpp"
#include "scalematch/scale_match.hpp"
#include "scalematch/size_stats.hpp"
#include "scalematch/synth.hpp"
#include "scalematch/tiling.hpp"
#include "scalematch/util.hpp"

namespace scalematch {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

const char* const kVersionString =
    "scalematch 0.1.0 (schemas: annotations=1 detections=1 scale_plan=1 tile_provenance=1 "
    "eval_report=1 run_config=1)";

namespace {

std::string num(double v, int precision) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << v;
  return ss.str();
}

// pad to a display width; the two-byte UTF-8 sign in "mean±std" cells
// occupies a single column
std::string pad(std::string s, std::size_t width) {
  std::size_t display = s.size();
  for (char c : s)
    if (static_cast<unsigned char>(c) == 0xc2) --display;
  while (display < width) {
    s += ' ';
    ++display;
  }
  return s;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_run_config(const std::string& out_dir, const std::string& subcommand, json params) {
  json j;
  j["tool"] = kVersionString;
  j["subcommand"] = subcommand;
  j["params"] = std::move(params);
  atomic_write_text((fs::path(out_dir) / "run_config.json").string(), j.dump(1));
}

struct StatsOpts {
  std::string in;
  bool include_ignore = false;
  bool include_uncertain = false;
};

int run_stats(const StatsOpts& o) {
  const auto ds = load_annotations(o.in);
  std::size_t person = 0, ignore = 0, uncertain = 0;
  for (const auto& b : ds.boxes) {
    if (b.category == Category::ignore_region)
      ++ignore;
    else if (b.uncertain)
      ++uncertain;
    else
      ++person;
  }
  const auto stats = dataset_stats(ds, {o.include_ignore, o.include_uncertain});
  std::cout << "images: " << ds.images.size() << "  boxes: " << ds.boxes.size()
            << " (person " << person << ", ignore " << ignore << ", uncertain " << uncertain
            << ")  used: " << stats.absolute_size.n << "\n\n";
  std::cout << pad("dataset", 24) << pad("absolute size", 18) << pad("relative size", 18)
            << pad("aspect ratio", 18) << "\n";
  std::cout << pad(ds.name, 24)
            << pad(num(stats.absolute_size.mean, 1) + "±" +
                       num(stats.absolute_size.stddev, 1), 18)
            << pad(num(stats.relative_size.mean, 3) + "±" +
                       num(stats.relative_size.stddev, 3), 18)
            << pad(num(stats.aspect_ratio.mean, 3) + "±" +
                       num(stats.aspect_ratio.stddev, 3), 18)
            << "\n";
  return 0;
}

struct HistOpts {
  std::string in;
  std::string out_dir = ".";
  std::size_t k = 100;
  double alpha = 10.0;
  bool plain = false;
  bool include_ignore = false;
  bool include_uncertain = false;
};

int run_hist(const HistOpts& o) {
  const auto ds = load_annotations(o.in);
  const SizeFilter filter{o.include_ignore, o.include_uncertain};
  const auto sizes = collect_sizes(ds, filter);
  const auto rectified = rectified_histogram(sizes, o.k);
  const auto plain = uniform_histogram(sizes, o.k);
  const auto& emitted = o.plain ? plain : rectified;

  std::string csv = "bin_low,bin_high,probability\n";
  for (std::size_t i = 0; i < emitted.k(); ++i)
    csv += g17(emitted.bins[i].lo) + "," + g17(emitted.bins[i].hi) + "," +
           g17(emitted.probs[i]) + "\n";
  atomic_write_text((fs::path(o.out_dir) / "histogram.csv").string(), csv);

  std::cout << "sizes: " << sizes.size() << " (k=" << o.k << ", alpha=" << o.alpha << ")\n"
            << "sparse rate rectified: " << num(sparse_rate(rectified, o.alpha), 4) << "\n"
            << "sparse rate plain:     " << num(sparse_rate(plain, o.alpha), 4) << "\n"
            << "wrote " << (fs::path(o.out_dir) / "histogram.csv").string()
            << (o.plain ? " (plain)" : " (rectified)") << "\n";

  json params;
  params["in"] = o.in;
  params["k"] = o.k;
  params["alpha"] = o.alpha;
  params["plain"] = o.plain;
  params["include_ignore"] = o.include_ignore;
  params["include_uncertain"] = o.include_uncertain;
  write_run_config(o.out_dir, "hist", std::move(params));
  return 0;
}

struct SynthOpts {
  std::string out_dir = ".";
  std::size_t n_images = 100;
  int boxes_min = 1, boxes_max = 1;
  std::string size_law = "lognormal";
  double size_p1 = std::log(18.0), size_p2 = 0.8;
  std::string aspect_law = "fixed";
  double aspect_p1 = 1.0, aspect_p2 = 1.0;
  double width = 1920, height = 1080;
  double ignore_fraction = 0.0;
  std::uint64_t seed = 0;
  std::string name = "synthetic";
  bool images = false;
  int gray = 128;
};

int run_synth(const SynthOpts& o) {
  SynthSpec spec;
  spec.n_images = o.n_images;
  spec.boxes_min = o.boxes_min;
  spec.boxes_max = o.boxes_max;
  if (o.size_law == "lognormal")
    spec.size_law = SizeLaw::make_lognormal(o.size_p1, o.size_p2);
  else if (o.size_law == "uniform")
    spec.size_law = SizeLaw::make_uniform(o.size_p1, o.size_p2);
  else
    spec.size_law = SizeLaw::make_point(o.size_p1);
  spec.aspect_law = o.aspect_law == "uniform" ? AspectLaw::make_uniform(o.aspect_p1, o.aspect_p2)
                                              : AspectLaw::make_fixed(o.aspect_p1);
  spec.image_w = o.width;
  spec.image_h = o.height;
  spec.ignore_fraction = o.ignore_fraction;
  spec.seed = o.seed;
  spec.name = o.name;

  const auto ds = generate(spec);
  save_annotations(ds, (fs::path(o.out_dir) / "dataset.json").string());
  if (o.images)
    write_blank_images(ds, (fs::path(o.out_dir) / "images").string(),
                       static_cast<unsigned char>(o.gray));
  std::cout << "generated " << ds.images.size() << " images, " << ds.boxes.size() << " boxes -> "
            << (fs::path(o.out_dir) / "dataset.json").string() << "\n";

  json params;
  params["n_images"] = o.n_images;
  params["boxes_min"] = o.boxes_min;
  params["boxes_max"] = o.boxes_max;
  params["size_law"] = o.size_law;
  params["size_p1"] = o.size_p1;
  params["size_p2"] = o.size_p2;
  params["aspect_law"] = o.aspect_law;
  params["aspect_p1"] = o.aspect_p1;
  params["aspect_p2"] = o.aspect_p2;
  params["width"] = o.width;
  params["height"] = o.height;
  params["ignore_fraction"] = o.ignore_fraction;
  params["seed"] = o.seed;
  params["name"] = o.name;
  params["images"] = o.images;
  write_run_config(o.out_dir, "synth", std::move(params));
  return 0;
}

struct MatchOpts {
  std::string source, target;
  std::string out_dir = ".";
  std::size_t k = 100;
  std::uint64_t seed = 0;
  double clamp_min = 1.0 / 32, clamp_max = 32.0;
  bool annotations_only = false;
  std::string image_dir_in, image_dir_out;
  std::string interp = "bilinear";
  int workers = 0;
  bool include_uncertain = false;
};

int run_match(const MatchOpts& o, bool monotone) {
  const char* name = monotone ? "msm" : "match";
  if (!o.annotations_only && o.image_dir_in.empty()) {
    std::cerr << "scalematch: " << name
              << ": --image-dir-in is required unless --annotations-only is set\n";
    return 2;
  }
  const auto source = load_annotations(o.source);
  const auto target = load_annotations(o.target);
  const SizeFilter filter{false, o.include_uncertain};
  const auto target_hist = rectified_histogram(target, o.k, filter);

  ScalePlan plan;
  if (monotone) {
    const auto map = build_monotone_map(collect_sizes(source, filter), target_hist);
    plan = build_monotone_plan(source, map, o.clamp_min, o.clamp_max);
  } else {
    plan = build_scale_plan(source, target_hist, o.seed, o.clamp_min, o.clamp_max);
  }

  ApplyOptions apply;
  apply.annotations_only = o.annotations_only;
  apply.image_dir_in = o.image_dir_in;
  apply.image_dir_out =
      o.image_dir_out.empty() ? (fs::path(o.out_dir) / "images").string() : o.image_dir_out;
  apply.interp = o.interp == "nearest" ? Interp::nearest : Interp::bilinear;
  apply.workers = o.workers;
  const auto matched = apply_scale_plan(source, plan, apply);

  save_annotations(matched, (fs::path(o.out_dir) / "annotations.json").string());
  save_scale_plan(plan, (fs::path(o.out_dir) / "scale_plan.json").string());

  std::size_t clamped = 0, pass_through = 0;
  for (const auto& e : plan.entries) {
    clamped += e.clamped ? 1 : 0;
    pass_through += e.mean_size == 0.0 ? 1 : 0;
  }
  std::cout << name << ": " << plan.entries.size() << " images (" << clamped << " clamped, "
            << pass_through << " without person boxes) -> "
            << (fs::path(o.out_dir) / "annotations.json").string() << "\n";

  json params;
  params["source"] = o.source;
  params["target"] = o.target;
  params["k"] = o.k;
  if (!monotone) params["seed"] = o.seed;
  params["clamp_min"] = o.clamp_min;
  params["clamp_max"] = o.clamp_max;
  params["annotations_only"] = o.annotations_only;
  params["image_dir_in"] = o.image_dir_in;
  params["image_dir_out"] = apply.image_dir_out;
  params["interp"] = o.interp;
  params["include_uncertain"] = o.include_uncertain;
  write_run_config(o.out_dir, name, std::move(params));
  return 0;
}

struct TileOpts {
  std::string in;
  std::string out_dir = ".";
  int tile_w = 1000, tile_h = 1000, overlap = 100;
  bool pixels = false;
  std::string image_dir_in, image_dir_out;
  std::string fill_value;      // "r,g,b"
  std::string fill_mean_from;  // annotation file; mean over its images
  int workers = 0;
};

int run_tile(const TileOpts& o) {
  if (o.pixels && o.image_dir_in.empty()) {
    std::cerr << "scalematch: tile: --image-dir-in is required with --pixels\n";
    return 2;
  }
  const auto ds = load_annotations(o.in);

  TileOptions options;
  options.tile_w = o.tile_w;
  options.tile_h = o.tile_h;
  options.overlap = o.overlap;
  options.pixels = o.pixels;
  options.image_dir_in = o.image_dir_in;
  options.image_dir_out =
      o.image_dir_out.empty() ? (fs::path(o.out_dir) / "images").string() : o.image_dir_out;
  options.workers = o.workers;
  if (!o.fill_value.empty()) {
    std::array<double, 3> rgb{};
    if (std::sscanf(o.fill_value.c_str(), "%lf,%lf,%lf", &rgb[0], &rgb[1], &rgb[2]) != 3) {
      std::cerr << "scalematch: tile: --fill-value expects r,g,b\n";
      return 2;
    }
    options.fill_ignore = true;
    options.fill_value = rgb;
  } else if (!o.fill_mean_from.empty()) {
    const auto fill_ds = load_annotations(o.fill_mean_from);
    options.fill_ignore = true;
    options.fill_value = mean_pixel_value(fill_ds, o.image_dir_in);
  }

  const auto tiled = cut_dataset(ds, options);
  save_annotations(tiled.dataset, (fs::path(o.out_dir) / "tiles.json").string());
  save_provenance(tiled.provenance, (fs::path(o.out_dir) / "provenance.json").string());

  std::size_t pure = 0;
  for (const auto& t : tiled.provenance.tiles) pure += t.pure_background ? 1 : 0;
  std::cout << "tile: " << ds.images.size() << " images -> " << tiled.provenance.tiles.size()
            << " tiles (" << pure << " pure background), " << tiled.dataset.boxes.size()
            << " boxes\n";

  json params;
  params["in"] = o.in;
  params["tile_w"] = o.tile_w;
  params["tile_h"] = o.tile_h;
  params["overlap"] = o.overlap;
  params["pixels"] = o.pixels;
  params["image_dir_in"] = o.image_dir_in;
  params["image_dir_out"] = options.image_dir_out;
  if (options.fill_ignore)
    params["fill_value"] = json::array(
        {options.fill_value[0], options.fill_value[1], options.fill_value[2]});
  write_run_config(o.out_dir, "tile", std::move(params));
  return 0;
}

struct MergeOpts {
  std::string dets, provenance;
  std::string out_dir = ".";
  double nms_iou = 0.5;
  int cap = 200;
};

int run_merge(const MergeOpts& o) {
  const auto tile_dets = load_detections(o.dets, o.cap);
  const auto prov = load_provenance(o.provenance);
  const auto merged = merge_detections(tile_dets, prov, o.nms_iou, o.cap);
  save_detections(merged, (fs::path(o.out_dir) / "detections.json").string());
  std::cout << "merge: " << tile_dets.detections.size() << " tile detections -> "
            << merged.detections.size() << " merged\n";

  json params;
  params["dets"] = o.dets;
  params["provenance"] = o.provenance;
  params["nms_iou"] = o.nms_iou;
  params["cap"] = o.cap;
  write_run_config(o.out_dir, "merge", std::move(params));
  return 0;
}

struct EvalOpts {
  std::string gt, dets;
  std::string out_dir = ".";
  std::vector<double> iou_thresholds;
  std::vector<double> fppi_points;
  bool no_uncertain_as_ignore = false;
  int cap = 200;
  bool pr_csv = false;
};

int run_eval(const EvalOpts& o) {
  const auto gt = load_annotations(o.gt);
  const auto dets = load_detections(o.dets, o.cap);
  EvalConfig cfg;
  if (!o.iou_thresholds.empty()) cfg.iou_thresholds = o.iou_thresholds;
  if (!o.fppi_points.empty()) cfg.fppi_points = o.fppi_points;
  cfg.uncertain_as_ignore = !o.no_uncertain_as_ignore;

  const auto report = evaluate(dets, gt, cfg);
  render_report(report, std::cout);
  save_report(report, (fs::path(o.out_dir) / "report.json").string());

  if (o.pr_csv) {
    for (const auto& cell : report.cells) {
      std::string csv = "score,recall,precision\n";
      for (const auto& p : cell.pr_curve)
        csv += g17(p.score) + "," + g17(p.recall) + "," + g17(p.precision) + "\n";
      const std::string file = "pr_" + cell.partition + "_" + num(cell.iou_threshold, 2) + ".csv";
      atomic_write_text((fs::path(o.out_dir) / file).string(), csv);
    }
  }

  json params;
  params["gt"] = o.gt;
  params["dets"] = o.dets;
  params["iou_thresholds"] = cfg.iou_thresholds;
  params["fppi_points"] = cfg.fppi_points;
  params["uncertain_as_ignore"] = cfg.uncertain_as_ignore;
  params["cap"] = o.cap;
  write_run_config(o.out_dir, "eval", std::move(params));
  return 0;
}

struct AnchorOpts {
  std::string in;
  std::size_t k_sizes = 5, k_ratios = 3;
  std::uint64_t seed = 0;
};

int run_cluster_anchors(const AnchorOpts& o) {
  const auto ds = load_annotations(o.in);
  const auto anchors = cluster_anchors(ds, o.k_sizes, o.k_ratios, o.seed);
  std::cout << "anchor sizes:";
  for (double s : anchors.sizes) std::cout << " " << num(s, 2);
  std::cout << "\naspect ratios:";
  for (double r : anchors.ratios) std::cout << " " << num(r, 2);
  std::cout << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Size-distribution matching and tiny-object detection evaluation"};
  app.set_version_flag("--version", std::string(kVersionString));
  app.set_config("--config", "", "Read option defaults from a config file");
  app.require_subcommand(1);

  StatsOpts stats;
  auto* stats_cmd = app.add_subcommand("stats", "Mean/std of object sizes and aspect ratios");
  stats_cmd->add_option("--in", stats.in, "Annotation file")->required();
  stats_cmd->add_flag("--include-ignore", stats.include_ignore, "Include ignore regions");
  stats_cmd->add_flag("--include-uncertain", stats.include_uncertain, "Include uncertain boxes");

  HistOpts hist;
  auto* hist_cmd = app.add_subcommand("hist", "Size histogram as CSV plus sparse rates");
  hist_cmd->add_option("--in", hist.in, "Annotation file")->required();
  hist_cmd->add_option("--out-dir", hist.out_dir, "Output directory");
  hist_cmd->add_option("--k", hist.k, "Bin count");
  hist_cmd->add_option("--alpha", hist.alpha, "Sparse-rate threshold parameter");
  hist_cmd->add_flag("--plain", hist.plain, "Emit the plain uniform-width histogram");
  hist_cmd->add_flag("--include-ignore", hist.include_ignore, "Include ignore regions");
  hist_cmd->add_flag("--include-uncertain", hist.include_uncertain, "Include uncertain boxes");

  SynthOpts synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory");
  synth_cmd->add_option("--n-images", synth.n_images, "Number of images");
  synth_cmd->add_option("--boxes-min", synth.boxes_min, "Min boxes per image");
  synth_cmd->add_option("--boxes-max", synth.boxes_max, "Max boxes per image");
  synth_cmd->add_option("--size-law", synth.size_law, "lognormal|uniform|point")
      ->check(CLI::IsMember({"lognormal", "uniform", "point"}));
  synth_cmd->add_option("--size-p1", synth.size_p1, "mu / lo / point size");
  synth_cmd->add_option("--size-p2", synth.size_p2, "sigma / hi");
  synth_cmd->add_option("--aspect-law", synth.aspect_law, "fixed|uniform")
      ->check(CLI::IsMember({"fixed", "uniform"}));
  synth_cmd->add_option("--aspect-p1", synth.aspect_p1, "ratio / lo");
  synth_cmd->add_option("--aspect-p2", synth.aspect_p2, "hi");
  synth_cmd->add_option("--width", synth.width, "Image width");
  synth_cmd->add_option("--height", synth.height, "Image height");
  synth_cmd->add_option("--ignore-fraction", synth.ignore_fraction, "Fraction of ignore boxes");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");
  synth_cmd->add_option("--name", synth.name, "Dataset name");
  synth_cmd->add_flag("--images", synth.images, "Also write flat-gray PNGs");
  synth_cmd->add_option("--gray", synth.gray, "Gray level for --images")
      ->check(CLI::Range(0, 255));

  MatchOpts match;
  auto* match_cmd = app.add_subcommand("match", "Scale Match: sample-based size alignment");
  MatchOpts msm;
  auto* msm_cmd = app.add_subcommand("msm", "Monotone Scale Match: order-preserving alignment");
  for (auto& [cmd, o] : {std::pair{match_cmd, &match}, std::pair{msm_cmd, &msm}}) {
    cmd->add_option("--source", o->source, "Source annotation file")->required();
    cmd->add_option("--target", o->target, "Target annotation file")->required();
    cmd->add_option("--out-dir", o->out_dir, "Output directory");
    cmd->add_option("--k", o->k, "Histogram bin count");
    cmd->add_option("--clamp-min", o->clamp_min, "Lower ratio clamp");
    cmd->add_option("--clamp-max", o->clamp_max, "Upper ratio clamp");
    cmd->add_flag("--annotations-only", o->annotations_only, "Skip image pixels");
    cmd->add_option("--image-dir-in", o->image_dir_in, "Source image directory");
    cmd->add_option("--image-dir-out", o->image_dir_out, "Output image directory");
    cmd->add_option("--interp", o->interp, "bilinear|nearest")
        ->check(CLI::IsMember({"bilinear", "nearest"}));
    cmd->add_option("--workers", o->workers, "Parallel workers (0 = cores)");
    cmd->add_flag("--include-uncertain", o->include_uncertain,
                  "Include uncertain boxes in the size distribution");
  }
  match_cmd->add_option("--seed", match.seed, "RNG seed");

  TileOpts tile;
  auto* tile_cmd = app.add_subcommand("tile", "Cut images into overlapping sub-images");
  tile_cmd->add_option("--in", tile.in, "Annotation file")->required();
  tile_cmd->add_option("--out-dir", tile.out_dir, "Output directory");
  tile_cmd->add_option("--tile-w", tile.tile_w, "Tile width");
  tile_cmd->add_option("--tile-h", tile.tile_h, "Tile height");
  tile_cmd->add_option("--overlap", tile.overlap, "Tile overlap");
  tile_cmd->add_flag("--pixels", tile.pixels, "Also crop image pixels");
  tile_cmd->add_option("--image-dir-in", tile.image_dir_in, "Source image directory");
  tile_cmd->add_option("--image-dir-out", tile.image_dir_out, "Tile image directory");
  auto* fv = tile_cmd->add_option("--fill-value", tile.fill_value,
                                  "Fill ignore regions with this r,g,b value");
  tile_cmd->add_option("--fill-mean-from", tile.fill_mean_from,
                       "Fill ignore regions with the mean pixel of this dataset")
      ->excludes(fv);
  tile_cmd->add_option("--workers", tile.workers, "Parallel workers (0 = cores)");

  MergeOpts merge;
  auto* merge_cmd = app.add_subcommand("merge", "Merge tile detections back with NMS");
  merge_cmd->add_option("--dets", merge.dets, "Tile detection file")->required();
  merge_cmd->add_option("--provenance", merge.provenance, "Tile provenance file")->required();
  merge_cmd->add_option("--out-dir", merge.out_dir, "Output directory");
  merge_cmd->add_option("--nms-iou", merge.nms_iou, "NMS IoU threshold");
  merge_cmd->add_option("--cap", merge.cap, "Per-image detection cap");

  EvalOpts eval;
  auto* eval_cmd = app.add_subcommand("eval", "Size-partitioned AP / log-average miss rate");
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth annotation file")->required();
  eval_cmd->add_option("--dets", eval.dets, "Detection file")->required();
  eval_cmd->add_option("--out-dir", eval.out_dir, "Output directory");
  eval_cmd->add_option("--iou", eval.iou_thresholds, "IoU thresholds");
  eval_cmd->add_option("--fppi-points", eval.fppi_points, "FPPI reference points for MR");
  eval_cmd->add_flag("--no-uncertain-as-ignore", eval.no_uncertain_as_ignore,
                     "Treat uncertain boxes as ordinary targets");
  eval_cmd->add_option("--cap", eval.cap, "Per-image detection cap");
  eval_cmd->add_flag("--pr-csv", eval.pr_csv, "Write a PR-curve CSV per cell");

  AnchorOpts anchors;
  auto* anchors_cmd = app.add_subcommand("cluster-anchors", "K-means anchor sizes and ratios");
  anchors_cmd->add_option("--in", anchors.in, "Annotation file")->required();
  anchors_cmd->add_option("--k-sizes", anchors.k_sizes, "Number of size clusters");
  anchors_cmd->add_option("--k-ratios", anchors.k_ratios, "Number of ratio clusters");
  anchors_cmd->add_option("--seed", anchors.seed, "RNG seed");

  std::vector<const char*> argv;
  argv.push_back("scalematch");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (stats_cmd->parsed()) return run_stats(stats);
    if (hist_cmd->parsed()) return run_hist(hist);
    if (synth_cmd->parsed()) return run_synth(synth);
    if (match_cmd->parsed()) return run_match(match, false);
    if (msm_cmd->parsed()) return run_match(msm, true);
    if (tile_cmd->parsed()) return run_tile(tile);
    if (merge_cmd->parsed()) return run_merge(merge);
    if (eval_cmd->parsed()) return run_eval(eval);
    if (anchors_cmd->parsed()) return run_cluster_anchors(anchors);
  } catch (const Error& e) {
    std::cerr << "scalematch: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "scalematch: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace scalematch
