#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "annofix/io.hpp"
#include "annofix/metrics.hpp"
#include "annofix/pipeline.hpp"
#include "annofix/synth.hpp"
#include "annofix/vectorize.hpp"

// Exit codes: 0 success, 1 internal error, 2 usage or input error.

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace annofix;

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

json affine_to_json(const AffineParams& p) {
  return {{"tr_x", p.tr_x}, {"tr_y", p.tr_y}, {"s", p.s},
          {"theta", p.theta}, {"sh_x", p.sh_x}, {"sh_y", p.sh_y}};
}

// --- synth -------------------------------------------------------------------

struct SynthFileSpec {
  synth::SynthSpec scene;
  std::optional<synth::CorruptionSpec> corruption;
};

SynthFileSpec parse_synth_spec(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path), nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw IoError("spec '" + path + "': " + e.what());
  }
  SynthFileSpec out;
  synth::SynthSpec& s = out.scene;
  if (doc.contains("canvas")) {
    s.canvas_w = doc["canvas"].at(0).get<int>();
    s.canvas_h = doc["canvas"].at(1).get<int>();
  }
  s.line_width = doc.value("line_width", s.line_width);
  s.line_contrast = doc.value("line_contrast", s.line_contrast);
  s.n_lines = doc.value("n_lines", s.n_lines);
  if (doc.contains("background")) {
    const json& bg = doc["background"];
    const std::string texture = bg.value("texture", "flat");
    if (texture == "flat") s.texture = synth::BackgroundTexture::flat;
    else if (texture == "noise") s.texture = synth::BackgroundTexture::noise;
    else if (texture == "clutter") s.texture = synth::BackgroundTexture::clutter;
    else throw IoError("spec: unknown background texture '" + texture + "'");
    s.background_level = bg.value("level", s.background_level);
    s.noise_sigma = bg.value("noise_sigma", s.noise_sigma);
    s.clutter_density = bg.value("clutter_density", s.clutter_density);
    s.clutter_level = bg.value("clutter_level", s.clutter_level);
  }
  if (doc.contains("style")) {
    const json& st = doc["style"];
    const std::string kind = st.value("kind", "solid");
    if (kind == "solid") s.style = synth::LineStyle::solid;
    else if (kind == "dashed") s.style = synth::LineStyle::dashed;
    else throw IoError("spec: unknown line style '" + kind + "'");
    s.dash_period = st.value("period", s.dash_period);
    s.dash_duty = st.value("duty", s.dash_duty);
  }
  if (doc.contains("corruption")) {
    const json& c = doc["corruption"];
    synth::CorruptionSpec cs;
    cs.translate_max = c.value("translate_max", 0.0);
    cs.rotate_max = c.value("rotate_max_deg", 0.0) * kDegToRad;
    cs.scale_jitter = c.value("scale_jitter", 0.0);
    cs.shear_max = c.value("shear_max", 0.0);
    cs.false_fraction = c.value("false_fraction", 0.0);
    cs.drop_fraction = c.value("drop_fraction", 0.0);
    out.corruption = cs;
  }
  return out;
}

int cmd_synth(const std::string& spec_path, std::uint64_t seed, const std::string& out_dir) {
  const SynthFileSpec spec = parse_synth_spec(spec_path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) throw IoError("cannot create output dir '" + out_dir + "'");

  const synth::Scene scene = synth::gen_scene(spec.scene, seed);
  save_png(out_dir + "/image.png", scene.image);
  save_png_mask(out_dir + "/gt_mask.png", scene.gt_mask);
  save_geojson_lines(out_dir + "/gt.geojson", scene.gt_lines);

  json truth = {{"seed", seed}, {"lines", json::array()}};
  if (spec.corruption) {
    const synth::CorruptedAnnotations ann = synth::corrupt_annotations(
        scene.gt_lines, *spec.corruption, seed ^ 0x9e3779b97f4a7c15ULL, spec.scene.canvas_w,
        spec.scene.canvas_h, &scene.gt_mask);
    save_geojson_lines(out_dir + "/annotations.geojson", ann.lines);
    for (const synth::LineTruth& t : ann.truth) {
      truth["lines"].push_back(
          {{"id", t.id},
           {"status", t.status == synth::LineStatus::true_object ? "true" : "false"},
           {"affine", affine_to_json(t.applied)}});
    }
  } else {
    for (const Polyline& line : scene.gt_lines) {
      truth["lines"].push_back(
          {{"id", line.id}, {"status", "true"}, {"affine", affine_to_json(AffineParams::identity())}});
    }
  }
  write_text_file(out_dir + "/truth.json", truth.dump(2) + "\n");
  return 0;
}

// --- annotate ------------------------------------------------------------------

int cmd_annotate(const std::string& map_path, const std::string& vector_path, double radius,
                 const std::string& out_path, const std::string& transform_path) {
  const RasterImage map = load_png(map_path);
  std::optional<WorldToPixel> transform;
  if (!transform_path.empty()) transform = load_sidecar_transform(transform_path);
  const std::vector<Polyline> lines = load_geojson_lines(vector_path, transform);
  const BinaryMask mask = annot::buffer_rasterize(lines, radius, map.width(), map.height());
  save_png_mask(out_path, mask);
  return 0;
}

// --- correct -------------------------------------------------------------------

void apply_config_file(pipeline::CorrectOptions& opts, const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw IoError("config '" + path + "': " + e.what());
  }
  opts.annotation_radius = doc.value("annotation_radius", opts.annotation_radius);
  opts.poi_radius = doc.value("poi_radius", opts.poi_radius);
  opts.window = doc.value("window", opts.window);
  opts.overlap = doc.value("overlap", opts.overlap);
  opts.workers = doc.value("workers", opts.workers);
  if (doc.contains("lca")) {
    const json& l = doc["lca"];
    opts.lca.lambda = l.value("lambda", opts.lca.lambda);
    opts.lca.auto_lambda = l.value("auto_lambda", opts.lca.auto_lambda);
    opts.lca.max_iters = l.value("max_iters", opts.lca.max_iters);
    opts.lca.energy_tol = l.value("energy_tol", opts.lca.energy_tol);
    opts.lca.reject_overlap_min = l.value("reject_overlap_min", opts.lca.reject_overlap_min);
    opts.lca.shape_blur_sigma = l.value("shape_blur_sigma", opts.lca.shape_blur_sigma);
  }
}

int cmd_correct(const std::string& map_path, const std::string& vector_path,
                const pipeline::CorrectOptions& opts, const std::string& out_path,
                const std::string& report_path) {
  const RasterImage map = load_png(map_path);
  const std::vector<Polyline> lines = load_geojson_lines(vector_path);
  const pipeline::CorrectOutput result = pipeline::correct_map(map, lines, opts);

  long rejected = 0;
  json tiles = json::array();
  for (const pipeline::TileReport& t : result.tiles) {
    if (t.verdict != lca::Verdict::accepted) ++rejected;
    tiles.push_back({{"window", {{"x0", t.window.x0}, {"y0", t.window.y0},
                                 {"width", t.window.width}, {"height", t.window.height}}},
                     {"line_ids", t.window.source_polyline_ids},
                     {"verdict", t.verdict == lca::Verdict::accepted ? "accepted" : "rejected_false"},
                     {"iterations", t.iterations},
                     {"lambda", t.lambda_used},
                     {"overlap_ratio", t.overlap_ratio},
                     {"energy_first", t.energy_first},
                     {"energy_final", t.energy_final},
                     {"energy_monotone", t.energy_monotone},
                     {"shrink_violations", t.shrink_violations},
                     {"final_affine", affine_to_json(t.final_affine)}});
  }
  save_png_mask(out_path, result.merged);
  if (!report_path.empty()) {
    const json report = {{"params",
                          {{"annotation_radius", opts.annotation_radius},
                           {"poi_radius", opts.poi_radius},
                           {"window", opts.window},
                           {"overlap", opts.overlap},
                           {"lambda", opts.lca.lambda},
                           {"auto_lambda", opts.lca.auto_lambda},
                           {"max_iters", opts.lca.max_iters},
                           {"reject_overlap_min", opts.lca.reject_overlap_min}}},
                         {"tiles", tiles}};
    write_text_file(report_path, report.dump(2) + "\n");
  }
  if (!result.tiles.empty() && rejected == static_cast<long>(result.tiles.size())) {
    std::fprintf(stderr, "warning: all %ld tiles rejected as false annotations\n", rejected);
  }
  return 0;
}

// --- vectorize -------------------------------------------------------------------

int cmd_vectorize(const std::string& mask_path, const std::string& out_path,
                  const vectorize::VectorizeOptions& opts) {
  const BinaryMask mask = load_png_mask(mask_path);
  const vectorize::LineGraph graph = vectorize::mask_to_graph(mask, opts);
  std::vector<Polyline> lines;
  for (const vectorize::Edge& e : graph.edges) {
    Polyline line = e.geometry;
    line.id = "edge-" + std::to_string(&e - graph.edges.data());
    lines.push_back(std::move(line));
  }
  // Emit with node ids so the graph structure survives the round trip.
  json features = json::array();
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const vectorize::Edge& e = graph.edges[i];
    json coords = json::array();
    for (const Point& p : e.geometry.points) coords.push_back({p.x, p.y});
    features.push_back({{"type", "Feature"},
                        {"properties",
                         {{"id", "edge-" + std::to_string(i)},
                          {"node_a", e.node_a},
                          {"node_b", e.node_b},
                          {"length", e.length}}},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
  }
  const json doc = {{"type", "FeatureCollection"}, {"features", features}};
  write_text_file(out_path, doc.dump(2) + "\n");
  return 0;
}

// --- eval ---------------------------------------------------------------------

int cmd_eval(const std::string& pred_lines_path, const std::string& gt_lines_path,
             const std::string& pred_mask_path, const std::string& gt_mask_path, double tol,
             double apls_spacing, const std::string& out_path) {
  json report = {{"params", {{"tol", tol}, {"apls_control_spacing", apls_spacing},
                             {"apls_snap_radius", tol}}}};
  if (!pred_mask_path.empty() && !gt_mask_path.empty()) {
    const BinaryMask pred = load_png_mask(pred_mask_path);
    const BinaryMask gt = load_png_mask(gt_mask_path);
    const metrics::PixelScore s = metrics::pixel_prf(pred, gt);
    report["pixel"] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
                       {"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn},
                       {"zero_division", s.zero_division}};
  }
  if (!pred_lines_path.empty() && !gt_lines_path.empty()) {
    const vectorize::LineGraph pred =
        vectorize::graph_from_polylines(load_geojson_lines(pred_lines_path));
    const vectorize::LineGraph gt =
        vectorize::graph_from_polylines(load_geojson_lines(gt_lines_path));
    metrics::LineScore s = metrics::correctness_completeness(pred, gt, tol);
    s.apls = metrics::apls(pred, gt, apls_spacing, tol);
    report["lines"] = {{"correctness", s.correctness},
                       {"completeness", s.completeness},
                       {"apls", s.apls},
                       {"matched_pred_len", s.matched_pred_len},
                       {"total_pred_len", s.total_pred_len},
                       {"matched_gt_len", s.matched_gt_len},
                       {"total_gt_len", s.total_gt_len},
                       {"pred_empty", s.pred_empty},
                       {"gt_empty", s.gt_empty}};
  }
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text_file(out_path, text);
  }
  return 0;
}

// --- render ---------------------------------------------------------------------

int cmd_render(const std::string& map_path, const std::string& mask_path,
               const std::string& gt_path, const std::vector<std::string>& line_paths,
               const std::string& out_path) {
  const RasterImage map = load_png(map_path);
  std::optional<BinaryMask> mask;
  std::optional<BinaryMask> gt;
  if (!mask_path.empty()) mask = load_png_mask(mask_path);
  if (!gt_path.empty()) gt = load_png_mask(gt_path);
  std::vector<Polyline> lines;
  for (const std::string& path : line_paths) {
    for (Polyline& line : load_geojson_lines(path)) lines.push_back(std::move(line));
  }
  const RasterImage overlay = pipeline::render_overlay(
      map, mask ? &*mask : nullptr, gt ? &*gt : nullptr, lines);
  save_png(out_path, overlay);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"annofix: correct misaligned vector annotations over scanned map rasters"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scene bundle");
  std::string synth_spec, synth_out;
  std::uint64_t synth_seed = 1;
  synth_cmd->add_option("--spec", synth_spec, "scene spec JSON")->required();
  synth_cmd->add_option("--seed", synth_seed, "random seed");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();

  // annotate
  auto* annotate_cmd = app.add_subcommand("annotate", "rasterize buffered vector lines to a mask");
  std::string ann_map, ann_vec, ann_out, ann_transform;
  double ann_radius = annot::kDefaultAnnotationRadiusPx;
  annotate_cmd->add_option("--map", ann_map, "map PNG")->required();
  annotate_cmd->add_option("--vector", ann_vec, "GeoJSON lines")->required();
  annotate_cmd->add_option("--radius", ann_radius, "buffer radius, px");
  annotate_cmd->add_option("--transform", ann_transform, "world-to-pixel sidecar JSON");
  annotate_cmd->add_option("--out", ann_out, "output mask PNG")->required();

  // correct
  auto* correct_cmd = app.add_subcommand("correct", "label correction over tiles");
  std::string cor_map, cor_vec, cor_out, cor_report, cor_config;
  pipeline::CorrectOptions cor_opts;
  bool cor_auto_lambda = false;
  correct_cmd->add_option("--map", cor_map, "map PNG")->required();
  correct_cmd->add_option("--vector", cor_vec, "GeoJSON annotation lines")->required();
  correct_cmd->add_option("--config", cor_config, "JSON config (flags override)");
  correct_cmd->add_option("--lambda", cor_opts.lca.lambda, "shape term weight");
  correct_cmd->add_flag("--auto-lambda", cor_auto_lambda,
                        "balance the shape term against the color term at iteration 0");
  correct_cmd->add_option("--radius", cor_opts.annotation_radius, "annotation buffer radius, px");
  correct_cmd->add_option("--poi-radius", cor_opts.poi_radius, "pixels-of-interest radius, px");
  correct_cmd->add_option("--window", cor_opts.window, "tile size, px");
  correct_cmd->add_option("--overlap", cor_opts.overlap, "tile overlap, px");
  correct_cmd->add_option("--workers", cor_opts.workers, "concurrent tiles");
  correct_cmd->add_option("--max-iters", cor_opts.lca.max_iters, "iteration cap per tile");
  correct_cmd->add_option("--out", cor_out, "merged mask PNG")->required();
  correct_cmd->add_option("--report", cor_report, "per-tile report JSON");

  // vectorize
  auto* vec_cmd = app.add_subcommand("vectorize", "mask to line GeoJSON");
  std::string vec_mask, vec_out;
  vectorize::VectorizeOptions vec_opts;
  vec_cmd->add_option("--mask", vec_mask, "mask PNG")->required();
  vec_cmd->add_option("--turn-angle", vec_opts.turn_angle_min_deg, "turning node threshold, deg");
  vec_cmd->add_option("--min-component", vec_opts.min_component_px, "drop smaller components");
  vec_cmd->add_option("--out", vec_out, "output GeoJSON")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "pixel and line metrics");
  std::string ev_pred_lines, ev_gt_lines, ev_pred_mask, ev_gt_mask, ev_out;
  double ev_tol = 5.0;
  double ev_spacing = 50.0;
  eval_cmd->add_option("--pred-lines", ev_pred_lines, "predicted GeoJSON");
  eval_cmd->add_option("--gt-lines", ev_gt_lines, "ground-truth GeoJSON");
  eval_cmd->add_option("--pred-mask", ev_pred_mask, "predicted mask PNG");
  eval_cmd->add_option("--gt-mask", ev_gt_mask, "ground-truth mask PNG");
  eval_cmd->add_option("--tol", ev_tol, "match tolerance, px");
  eval_cmd->add_option("--apls-spacing", ev_spacing, "control node spacing, px");
  eval_cmd->add_option("--out", ev_out, "report JSON ('-' for stdout)");

  // render
  auto* render_cmd = app.add_subcommand("render", "overlay masks and lines on the map");
  std::string rd_map, rd_mask, rd_gt, rd_out;
  std::vector<std::string> rd_lines;
  render_cmd->add_option("--map", rd_map, "map PNG")->required();
  render_cmd->add_option("--mask", rd_mask, "mask PNG (green, or green/red against --gt)");
  render_cmd->add_option("--gt", rd_gt, "ground-truth mask PNG");
  render_cmd->add_option("--lines", rd_lines, "GeoJSON overlays");
  render_cmd->add_option("--out", rd_out, "output PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth_spec, synth_seed, synth_out);
    if (annotate_cmd->parsed()) {
      return cmd_annotate(ann_map, ann_vec, ann_radius, ann_out, ann_transform);
    }
    if (correct_cmd->parsed()) {
      if (!cor_config.empty()) {
        // Config file fills anything not set explicitly on the command line.
        pipeline::CorrectOptions file_opts;
        apply_config_file(file_opts, cor_config);
        if (!correct_cmd->count("--lambda")) cor_opts.lca.lambda = file_opts.lca.lambda;
        if (!correct_cmd->count("--radius")) cor_opts.annotation_radius = file_opts.annotation_radius;
        if (!correct_cmd->count("--poi-radius")) cor_opts.poi_radius = file_opts.poi_radius;
        if (!correct_cmd->count("--window")) cor_opts.window = file_opts.window;
        if (!correct_cmd->count("--overlap")) cor_opts.overlap = file_opts.overlap;
        if (!correct_cmd->count("--workers")) cor_opts.workers = file_opts.workers;
        if (!correct_cmd->count("--max-iters")) cor_opts.lca.max_iters = file_opts.lca.max_iters;
        cor_opts.lca.auto_lambda = file_opts.lca.auto_lambda;
        cor_opts.lca.energy_tol = file_opts.lca.energy_tol;
        cor_opts.lca.reject_overlap_min = file_opts.lca.reject_overlap_min;
        cor_opts.lca.shape_blur_sigma = file_opts.lca.shape_blur_sigma;
      }
      if (cor_auto_lambda) cor_opts.lca.auto_lambda = true;
      return cmd_correct(cor_map, cor_vec, cor_opts, cor_out, cor_report);
    }
    if (vec_cmd->parsed()) return cmd_vectorize(vec_mask, vec_out, vec_opts);
    if (eval_cmd->parsed()) {
      return cmd_eval(ev_pred_lines, ev_gt_lines, ev_pred_mask, ev_gt_mask, ev_tol, ev_spacing,
                      ev_out);
    }
    if (render_cmd->parsed()) return cmd_render(rd_map, rd_mask, rd_gt, rd_lines, rd_out);
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 2;
}
