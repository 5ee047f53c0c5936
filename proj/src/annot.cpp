#include "annofix/annot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace annofix::annot {

namespace {

struct Segment {
  Point a;
  Point b;
  BoundingBox box;  // padded by radius
};

std::vector<Segment> collect_segments(const std::vector<Polyline>& lines, double radius) {
  std::vector<Segment> segs;
  for (const Polyline& line : lines) {
    if (line.points.size() < 2) throw std::invalid_argument("Polyline needs >= 2 points");
    for (std::size_t i = 1; i < line.points.size(); ++i) {
      Segment s{line.points[i - 1], line.points[i], {}};
      s.box.expand(s.a);
      s.box.expand(s.b);
      s.box.pad(radius);
      segs.push_back(s);
    }
  }
  return segs;
}

}  // namespace

BinaryMask buffer_rasterize(const std::vector<Polyline>& lines, double radius, int canvas_w,
                            int canvas_h) {
  if (radius < 0.0) throw std::invalid_argument("buffer_rasterize: radius must be >= 0");
  BinaryMask mask(canvas_w, canvas_h, 0);
  if (lines.empty()) return mask;
  const std::vector<Segment> segs = collect_segments(lines, radius);
  const double r2 = radius * radius;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < canvas_h; ++y) {
    for (const Segment& s : segs) {
      if (y < s.box.min_y || y > s.box.max_y) continue;
      const int x_lo = std::max(0, static_cast<int>(std::ceil(s.box.min_x)));
      const int x_hi = std::min(canvas_w - 1, static_cast<int>(std::floor(s.box.max_x)));
      for (int x = x_lo; x <= x_hi; ++x) {
        if (mask.at(x, y)) continue;
        const Point p{static_cast<double>(x), static_cast<double>(y)};
        if (point_segment_dist2(p, s.a, s.b) <= r2) mask.at(x, y) = 1;
      }
    }
  }
  return mask;
}

BinaryMask make_poi(const std::vector<Polyline>& lines, double radius, int canvas_w, int canvas_h) {
  return buffer_rasterize(lines, radius, canvas_w, canvas_h);
}

std::vector<TileWindow> tile_windows(const std::vector<Polyline>& lines, int map_w, int map_h,
                                     int window, int overlap, double buffer_radius) {
  if (window <= 2 * overlap) throw std::invalid_argument("tile_windows: window must be > 2*overlap");
  const int win_w = std::min(window, map_w);
  const int win_h = std::min(window, map_h);
  const int stride_x = std::max(1, win_w - overlap);
  const int stride_y = std::max(1, win_h - overlap);

  // Key windows by origin; the size is uniform.
  std::map<std::pair<int, int>, std::vector<std::string>> found;
  for (const Polyline& line : lines) {
    BoundingBox box = polyline_bbox(line);
    box.pad(buffer_radius);
    const int lo_x = std::max(0, static_cast<int>(std::floor(box.min_x)));
    const int hi_x = std::min(map_w - 1, static_cast<int>(std::ceil(box.max_x)));
    const int lo_y = std::max(0, static_cast<int>(std::floor(box.min_y)));
    const int hi_y = std::min(map_h - 1, static_cast<int>(std::ceil(box.max_y)));
    if (lo_x > hi_x || lo_y > hi_y) continue;

    std::vector<int> xs;
    for (int x = std::min(lo_x, map_w - win_w);; x += stride_x) {
      x = std::min(x, map_w - win_w);
      xs.push_back(x);
      if (x + win_w > hi_x || x == map_w - win_w) break;
    }
    std::vector<int> ys;
    for (int y = std::min(lo_y, map_h - win_h);; y += stride_y) {
      y = std::min(y, map_h - win_h);
      ys.push_back(y);
      if (y + win_h > hi_y || y == map_h - win_h) break;
    }
    for (int y : ys) {
      for (int x : xs) {
        found[{y, x}].push_back(line.id);
      }
    }
  }

  std::vector<TileWindow> tiles;
  for (auto& [origin, ids] : found) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    tiles.push_back({origin.second, origin.first, win_w, win_h, ids});
  }
  return tiles;
}

}  // namespace annofix::annot
