#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace annofix {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Open chain of >= 2 points in pixel coordinates (x right, y down).
struct Polyline {
  std::string id;
  std::vector<Point> points;
};

inline double dist2(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Squared distance from p to segment ab (round caps: clamps the projection).
inline double point_segment_dist2(const Point& p, const Point& a, const Point& b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
  }
  const Point q{a.x + t * vx, a.y + t * vy};
  return dist2(p, q);
}

inline double polyline_length(const Polyline& line) {
  double len = 0.0;
  for (std::size_t i = 1; i < line.points.size(); ++i) {
    len += std::sqrt(dist2(line.points[i - 1], line.points[i]));
  }
  return len;
}

/// Points spaced `spacing` apart along the chain, always including both ends.
inline std::vector<Point> resample_polyline(const Polyline& line, double spacing) {
  std::vector<Point> out;
  if (line.points.size() < 2) return out;
  const double total = polyline_length(line);
  if (total <= 0.0) return out;
  const int n = std::max(1, static_cast<int>(std::ceil(total / spacing)));
  const double step = total / n;
  out.push_back(line.points.front());
  double target = step;
  double walked = 0.0;
  std::size_t seg = 1;
  Point prev = line.points[0];
  while (seg < line.points.size()) {
    const Point& next = line.points[seg];
    const double seg_len = std::sqrt(dist2(prev, next));
    if (walked + seg_len >= target - 1e-12) {
      const double t = seg_len > 0.0 ? (target - walked) / seg_len : 0.0;
      out.push_back({prev.x + t * (next.x - prev.x), prev.y + t * (next.y - prev.y)});
      prev = out.back();
      walked = target;
      target += step;
      if (out.size() > static_cast<std::size_t>(n)) break;
    } else {
      walked += seg_len;
      prev = next;
      ++seg;
    }
  }
  if (out.size() < static_cast<std::size_t>(n) + 1) out.push_back(line.points.back());
  return out;
}

struct BoundingBox {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
  bool valid = false;

  void expand(const Point& p) {
    if (!valid) {
      min_x = max_x = p.x;
      min_y = max_y = p.y;
      valid = true;
    } else {
      if (p.x < min_x) min_x = p.x;
      if (p.x > max_x) max_x = p.x;
      if (p.y < min_y) min_y = p.y;
      if (p.y > max_y) max_y = p.y;
    }
  }
  void pad(double r) {
    min_x -= r;
    min_y -= r;
    max_x += r;
    max_y += r;
  }
};

inline BoundingBox polyline_bbox(const Polyline& line) {
  BoundingBox box;
  for (const Point& p : line.points) box.expand(p);
  return box;
}

}  // namespace annofix
