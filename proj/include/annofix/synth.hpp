#pragma once

#include <cstdint>
#include <vector>

#include "annofix/affine.hpp"
#include "annofix/geometry.hpp"
#include "annofix/grid.hpp"

namespace annofix::synth {

enum class BackgroundTexture { flat, noise, clutter };
enum class LineStyle { solid, dashed };

struct SynthSpec {
  int canvas_w = 256;
  int canvas_h = 256;
  int line_width = 5;          // px
  double line_contrast = 0.6;  // in (0, 1]
  double background_level = 0.9;
  BackgroundTexture texture = BackgroundTexture::flat;
  double noise_sigma = 0.0;      // for texture = noise
  double clutter_density = 1.0;  // strokes+discs per 10k px, for texture = clutter
  double clutter_level = 0.55;   // distinct gray of distractors
  int n_lines = 1;
  LineStyle style = LineStyle::solid;
  double dash_period = 12.0;
  double dash_duty = 0.6;
};

struct CorruptionSpec {
  double translate_max = 0.0;  // px
  double rotate_max = 0.0;     // radians
  double scale_jitter = 0.0;   // ratio
  double shear_max = 0.0;      // ratio
  double false_fraction = 0.0;  // fraction of lines replaced by background lines
  double drop_fraction = 0.0;   // fraction of lines removed entirely
};

struct Scene {
  RasterImage image;
  std::vector<Polyline> gt_lines;
  BinaryMask gt_mask;
};

enum class LineStatus { true_object, false_annotation };

struct LineTruth {
  std::string id;
  LineStatus status = LineStatus::true_object;
  AffineParams applied;  // transform taking the source line to the output line
};

struct CorruptedAnnotations {
  std::vector<Polyline> lines;
  std::vector<LineTruth> truth;
};

/// Deterministic scene for a given (spec, seed): random polylines darkened by
/// line_contrast over the textured background; gt_mask is the buffered lines.
Scene gen_scene(const SynthSpec& spec, std::uint64_t seed);

/// Random per-line affine jitter within the bounds, plus false/dropped lines.
CorruptedAnnotations corrupt_annotations(const std::vector<Polyline>& gt_lines,
                                         const CorruptionSpec& cspec, std::uint64_t seed,
                                         int canvas_w, int canvas_h,
                                         const BinaryMask* gt_mask = nullptr);

}  // namespace annofix::synth
