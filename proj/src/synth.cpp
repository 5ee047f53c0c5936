#include "annofix/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "annofix/annot.hpp"
#include "annofix/rng.hpp"

namespace annofix::synth {

namespace {

constexpr double kMargin = 24.0;  // keep geometry away from the canvas border

Point clamp_to_canvas(Point p, int w, int h) {
  p.x = std::clamp(p.x, kMargin, w - 1 - kMargin);
  p.y = std::clamp(p.y, kMargin, h - 1 - kMargin);
  return p;
}

Polyline random_polyline(Rng& rng, int w, int h, const std::string& id) {
  Polyline line;
  line.id = id;
  const int segments = rng.uniform_int(2, 4);
  Point cur{rng.uniform(kMargin, w - 1 - kMargin), rng.uniform(kMargin, h - 1 - kMargin)};
  double heading = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  line.points.push_back(cur);
  for (int i = 0; i < segments; ++i) {
    const double len = rng.uniform(50.0, 110.0);
    Point next = clamp_to_canvas({cur.x + len * std::cos(heading), cur.y + len * std::sin(heading)},
                                 w, h);
    if (std::sqrt(dist2(cur, next)) < 8.0) {  // clamped into a corner; bounce
      heading += 3.14159265358979323846 / 2.0;
      next = clamp_to_canvas({cur.x + len * std::cos(heading), cur.y + len * std::sin(heading)}, w,
                             h);
    }
    if (std::sqrt(dist2(cur, next)) >= 1.0) {
      line.points.push_back(next);
      cur = next;
    }
    heading += rng.uniform(-0.6, 0.6);  // ~34 degrees of wander per segment
  }
  if (line.points.size() < 2) {
    line.points.push_back(clamp_to_canvas({cur.x + 40.0, cur.y}, w, h));
  }
  return line;
}

void draw_disc(ScalarGrid& g, Point c, double r, double value) {
  const int x0 = std::max(0, static_cast<int>(std::floor(c.x - r)));
  const int x1 = std::min(g.width - 1, static_cast<int>(std::ceil(c.x + r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(c.y - r)));
  const int y1 = std::min(g.height - 1, static_cast<int>(std::ceil(c.y + r)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - c.x;
      const double dy = y - c.y;
      if (dx * dx + dy * dy <= r * r) g.at(x, y) = value;
    }
  }
}

/// Sub-polylines covering the "on" parts of each dash period.
std::vector<Polyline> dash_lines(const std::vector<Polyline>& lines, double period, double duty) {
  std::vector<Polyline> out;
  for (const Polyline& line : lines) {
    const double total = polyline_length(line);
    const double step = 0.5;
    Polyline cur;
    cur.id = line.id;
    for (double arc = 0.0; arc <= total; arc += step) {
      const bool on = std::fmod(arc, period) < duty * period;
      // Locate the point at this arc length.
      double walked = 0.0;
      Point p = line.points.front();
      for (std::size_t i = 1; i < line.points.size(); ++i) {
        const double seg = std::sqrt(dist2(line.points[i - 1], line.points[i]));
        if (walked + seg >= arc || i + 1 == line.points.size()) {
          const double f = seg > 0.0 ? std::clamp((arc - walked) / seg, 0.0, 1.0) : 0.0;
          p = {line.points[i - 1].x + f * (line.points[i].x - line.points[i - 1].x),
               line.points[i - 1].y + f * (line.points[i].y - line.points[i - 1].y)};
          break;
        }
        walked += seg;
      }
      if (on) {
        cur.points.push_back(p);
      } else if (cur.points.size() >= 2) {
        out.push_back(cur);
        cur.points.clear();
      } else {
        cur.points.clear();
      }
    }
    if (cur.points.size() >= 2) out.push_back(cur);
  }
  return out;
}

AffineParams random_affine(Rng& rng, const CorruptionSpec& c) {
  AffineParams p;
  p.tr_x = rng.uniform(-c.translate_max, c.translate_max);
  p.tr_y = rng.uniform(-c.translate_max, c.translate_max);
  p.theta = rng.uniform(-c.rotate_max, c.rotate_max);
  p.s = 1.0 + rng.uniform(-c.scale_jitter, c.scale_jitter);
  p.sh_x = rng.uniform(-c.shear_max, c.shear_max);
  p.sh_y = rng.uniform(-c.shear_max, c.shear_max);
  return p;
}

Point apply_affine(const AffineParams& p, Point q, Point center) {
  // Forward map matching the warp convention: scale, shear, rotate about the
  // center, then translate.
  const double c = std::cos(p.theta);
  const double n = std::sin(p.theta);
  const double x = q.x - center.x;
  const double y = q.y - center.y;
  const double sx = p.s * (x + p.sh_x * y);
  const double sy = p.s * (p.sh_y * x + y);
  return {center.x + sx * c - sy * n + p.tr_x, center.y + sx * n + sy * c + p.tr_y};
}

Point centroid(const Polyline& line) {
  Point c{0.0, 0.0};
  for (const Point& p : line.points) {
    c.x += p.x;
    c.y += p.y;
  }
  c.x /= static_cast<double>(line.points.size());
  c.y /= static_cast<double>(line.points.size());
  return c;
}

}  // namespace

Scene gen_scene(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.line_width < 1) throw std::invalid_argument("SynthSpec: line_width must be >= 1");
  if (spec.noise_sigma < 0.0) throw std::invalid_argument("SynthSpec: noise sigma must be >= 0");
  Rng rng(seed);
  Scene scene;

  ScalarGrid gray(spec.canvas_w, spec.canvas_h, spec.background_level);

  if (spec.texture == BackgroundTexture::clutter) {
    const long count = std::lround(spec.clutter_density * spec.canvas_w * spec.canvas_h / 10000.0);
    for (long i = 0; i < count; ++i) {
      if (rng.uniform() < 0.5) {
        // Short stroke.
        const Point a{rng.uniform(0.0, spec.canvas_w - 1.0), rng.uniform(0.0, spec.canvas_h - 1.0)};
        const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        const double len = rng.uniform(8.0, 25.0);
        const Point b{a.x + len * std::cos(ang), a.y + len * std::sin(ang)};
        const double r = rng.uniform(1.0, 2.0);
        const double steps = std::ceil(len * 2.0);
        for (int k = 0; k <= steps; ++k) {
          const double t = k / steps;
          draw_disc(gray, {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}, r, spec.clutter_level);
        }
      } else {
        draw_disc(gray, {rng.uniform(0.0, spec.canvas_w - 1.0), rng.uniform(0.0, spec.canvas_h - 1.0)},
                  rng.uniform(2.0, 5.0), spec.clutter_level);
      }
    }
  }

  for (int i = 0; i < spec.n_lines; ++i) {
    scene.gt_lines.push_back(
        random_polyline(rng, spec.canvas_w, spec.canvas_h, "gt-" + std::to_string(i)));
  }
  scene.gt_mask =
      annot::buffer_rasterize(scene.gt_lines, spec.line_width / 2.0, spec.canvas_w, spec.canvas_h);

  BinaryMask ink = scene.gt_mask;
  if (spec.style == LineStyle::dashed) {
    ink = annot::buffer_rasterize(dash_lines(scene.gt_lines, spec.dash_period, spec.dash_duty),
                                  spec.line_width / 2.0, spec.canvas_w, spec.canvas_h);
  }
  const double ink_level = spec.background_level - spec.line_contrast;
  for (std::size_t i = 0; i < ink.size(); ++i) {
    if (ink.bits[i]) gray.values[i] = ink_level;
  }

  if (spec.texture == BackgroundTexture::noise && spec.noise_sigma > 0.0) {
    for (double& v : gray.values) {
      v = std::clamp(v + rng.normal(0.0, spec.noise_sigma), 0.0, 1.0);
    }
  }
  for (double& v : gray.values) v = std::clamp(v, 0.0, 1.0);

  scene.image = RasterImage(std::move(gray));
  return scene;
}

CorruptedAnnotations corrupt_annotations(const std::vector<Polyline>& gt_lines,
                                         const CorruptionSpec& cspec, std::uint64_t seed,
                                         int canvas_w, int canvas_h, const BinaryMask* gt_mask) {
  Rng rng(seed);
  CorruptedAnnotations out;
  for (const Polyline& line : gt_lines) {
    if (cspec.drop_fraction > 0.0 && rng.uniform() < cspec.drop_fraction) continue;

    const bool make_false = cspec.false_fraction > 0.0 && rng.uniform() < cspec.false_fraction;
    if (make_false) {
      // Replace with a line over background: resample until the buffered
      // candidate barely touches the ground truth.
      Polyline candidate;
      for (int attempt = 0; attempt < 200; ++attempt) {
        candidate = random_polyline(rng, canvas_w, canvas_h, line.id);
        if (gt_mask == nullptr) break;
        const BinaryMask buf = annot::buffer_rasterize({candidate}, 3.0, canvas_w, canvas_h);
        long overlap = 0;
        long area = 0;
        for (std::size_t i = 0; i < buf.size(); ++i) {
          if (buf.bits[i]) {
            ++area;
            if (gt_mask->bits[i]) ++overlap;
          }
        }
        if (area > 0 && overlap < 0.05 * area) break;
      }
      out.lines.push_back(candidate);
      out.truth.push_back({line.id, LineStatus::false_annotation, AffineParams::identity()});
      continue;
    }

    const AffineParams p = random_affine(rng, cspec);
    const Point center = centroid(line);
    Polyline moved;
    moved.id = line.id;
    for (const Point& q : line.points) moved.points.push_back(apply_affine(p, q, center));
    out.lines.push_back(std::move(moved));
    out.truth.push_back({line.id, LineStatus::true_object, p});
  }
  return out;
}

}  // namespace annofix::synth
