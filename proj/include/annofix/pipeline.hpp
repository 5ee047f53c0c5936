#pragma once

#include <string>
#include <vector>

#include "annofix/annot.hpp"
#include "annofix/lca.hpp"

namespace annofix::pipeline {

struct CorrectOptions {
  double annotation_radius = annot::kDefaultAnnotationRadiusPx;
  double poi_radius = annot::kDefaultPoiRadiusPx;
  int window = 128;
  int overlap = 32;
  int workers = 0;  // 0: one OpenMP thread per core inside a single tile loop
  lca::LcaOptions lca;
};

struct TileReport {
  annot::TileWindow window;
  lca::Verdict verdict = lca::Verdict::rejected_false;
  int iterations = 0;
  double lambda_used = 0.0;
  double overlap_ratio = 0.0;
  double energy_first = 0.0;
  double energy_final = 0.0;
  bool energy_monotone = true;
  long shrink_violations = 0;
  AffineParams final_affine;
};

struct CorrectOutput {
  BinaryMask merged;  // logical OR of accepted tiles
  std::vector<TileReport> tiles;
};

/// Tile the buffered extent of the annotation lines, run the label
/// correction per tile (concurrently up to `workers`), and OR the accepted
/// masks onto the full canvas. Deterministic for any worker count.
CorrectOutput correct_map(const RasterImage& img, const std::vector<Polyline>& lines,
                          const CorrectOptions& opts);

/// Crop helpers shared by the pipeline and the CLI.
RasterImage crop(const RasterImage& img, const annot::TileWindow& win);
std::vector<Polyline> shift_lines(const std::vector<Polyline>& lines, double dx, double dy);

/// Overlay rendering: mask tinting (green over the map, or green=TP / red=FP
/// against a ground truth) and 1-px polyline strokes.
RasterImage render_overlay(const RasterImage& map, const BinaryMask* mask, const BinaryMask* gt,
                           const std::vector<Polyline>& lines);

}  // namespace annofix::pipeline
