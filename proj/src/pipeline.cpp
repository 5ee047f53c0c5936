#include "annofix/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace annofix::pipeline {

RasterImage crop(const RasterImage& img, const annot::TileWindow& win) {
  RasterImage out;
  for (const ScalarGrid& ch : img.channels) {
    ScalarGrid c(win.width, win.height);
    for (int y = 0; y < win.height; ++y) {
      for (int x = 0; x < win.width; ++x) {
        c.at(x, y) = ch.at(win.x0 + x, win.y0 + y);
      }
    }
    out.channels.push_back(std::move(c));
  }
  return out;
}

std::vector<Polyline> shift_lines(const std::vector<Polyline>& lines, double dx, double dy) {
  std::vector<Polyline> out = lines;
  for (Polyline& line : out) {
    for (Point& p : line.points) {
      p.x += dx;
      p.y += dy;
    }
  }
  return out;
}

namespace {

bool intersects(const BoundingBox& box, const annot::TileWindow& win) {
  return box.valid && box.max_x >= win.x0 && box.min_x <= win.x0 + win.width - 1 &&
         box.max_y >= win.y0 && box.min_y <= win.y0 + win.height - 1;
}

TileReport run_tile(const RasterImage& img, const std::vector<Polyline>& lines,
                    const annot::TileWindow& win, const CorrectOptions& opts, BinaryMask& mask_out) {
  const RasterImage tile_img = crop(img, win);
  std::vector<Polyline> local;
  for (const Polyline& line : lines) {
    BoundingBox box = polyline_bbox(line);
    box.pad(opts.poi_radius);
    if (intersects(box, win)) local.push_back(line);
  }
  local = shift_lines(local, -win.x0, -win.y0);
  const BinaryMask prior =
      annot::buffer_rasterize(local, opts.annotation_radius, win.width, win.height);
  const BinaryMask poi = annot::make_poi(local, opts.poi_radius, win.width, win.height);
  const lca::CorrectionResult res = lca::run(tile_img, prior, poi, opts.lca);

  TileReport report;
  report.window = win;
  report.verdict = res.verdict;
  report.iterations = res.iterations;
  report.lambda_used = res.lambda_used;
  report.overlap_ratio = res.overlap_ratio;
  report.energy_first = res.trace.empty() ? 0.0 : res.trace.front().energy;
  report.energy_final = res.trace.empty() ? 0.0 : res.trace.back().energy;
  report.energy_monotone = res.energy_monotone;
  report.shrink_violations = res.shrink_violations;
  report.final_affine = res.final_affine;
  mask_out = res.corrected_mask;
  return report;
}

}  // namespace

CorrectOutput correct_map(const RasterImage& img, const std::vector<Polyline>& lines,
                          const CorrectOptions& opts) {
  validate_image(img);
  const int w = img.width();
  const int h = img.height();
  const std::vector<annot::TileWindow> tiles =
      annot::tile_windows(lines, w, h, opts.window, opts.overlap, opts.poi_radius);

  CorrectOutput out;
  out.merged = BinaryMask(w, h, 0);
  out.tiles.resize(tiles.size());
  std::vector<BinaryMask> tile_masks(tiles.size());

  const int n = static_cast<int>(tiles.size());
  if (opts.workers > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(opts.workers)
    for (int i = 0; i < n; ++i) {
      out.tiles[i] = run_tile(img, lines, tiles[i], opts, tile_masks[i]);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      out.tiles[i] = run_tile(img, lines, tiles[i], opts, tile_masks[i]);
    }
  }

  // Merge in tile order; OR is order-independent, this just keeps it obvious.
  for (int i = 0; i < n; ++i) {
    if (out.tiles[i].verdict != lca::Verdict::accepted) continue;
    const annot::TileWindow& win = tiles[i];
    for (int y = 0; y < win.height; ++y) {
      for (int x = 0; x < win.width; ++x) {
        if (tile_masks[i].at(x, y)) out.merged.at(win.x0 + x, win.y0 + y) = 1;
      }
    }
  }
  return out;
}

namespace {

void tint(ScalarGrid& ch, int x, int y, double target, double alpha) {
  ch.at(x, y) = (1.0 - alpha) * ch.at(x, y) + alpha * target;
}

void stroke(RasterImage& img, const Polyline& line, double r, double g, double b) {
  for (std::size_t i = 1; i < line.points.size(); ++i) {
    const Point& a = line.points[i - 1];
    const Point& c = line.points[i];
    const double len = std::sqrt(dist2(a, c));
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 4.0)));
    for (int k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) / steps;
      const int x = static_cast<int>(std::lround(a.x + t * (c.x - a.x)));
      const int y = static_cast<int>(std::lround(a.y + t * (c.y - a.y)));
      if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) continue;
      img.channels[0].at(x, y) = r;
      img.channels[1].at(x, y) = g;
      img.channels[2].at(x, y) = b;
    }
  }
}

}  // namespace

RasterImage render_overlay(const RasterImage& map, const BinaryMask* mask, const BinaryMask* gt,
                           const std::vector<Polyline>& lines) {
  validate_image(map);
  RasterImage out;
  if (map.num_channels() == 3) {
    out = map;
  } else {
    out = RasterImage(map.channels[0], map.channels[0], map.channels[0]);
  }
  constexpr double kAlpha = 0.55;
  if (mask != nullptr) {
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        if (!mask->at(x, y)) continue;
        const bool is_tp = gt == nullptr || gt->at(x, y) != 0;
        if (is_tp) {
          tint(out.channels[0], x, y, 0.0, kAlpha);
          tint(out.channels[1], x, y, 0.8, kAlpha);
          tint(out.channels[2], x, y, 0.0, kAlpha);
        } else {
          tint(out.channels[0], x, y, 0.9, kAlpha);
          tint(out.channels[1], x, y, 0.0, kAlpha);
          tint(out.channels[2], x, y, 0.0, kAlpha);
        }
      }
    }
  }
  for (const Polyline& line : lines) stroke(out, line, 0.0, 0.2, 0.9);
  return out;
}

}  // namespace annofix::pipeline
