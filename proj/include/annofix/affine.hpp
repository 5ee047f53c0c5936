#pragma once

#include <cmath>

namespace annofix {

/// Six-parameter affine transform acting about a fixed center point.
/// Identity is (0, 0, 1, 0, 0, 0).
struct AffineParams {
  double tr_x = 0.0;   // translation, px
  double tr_y = 0.0;   // translation, px
  double s = 1.0;      // isotropic scale, > 0
  double theta = 0.0;  // rotation, radians
  double sh_x = 0.0;   // shear
  double sh_y = 0.0;

  static AffineParams identity() { return {}; }
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Pullback of output pixel (x, y) into template coordinates: the sampled
/// template location is center + inverse_map(x - center).
inline Vec2 affine_pullback(const AffineParams& p, double x_rel, double y_rel) {
  const double c = std::cos(p.theta);
  const double n = std::sin(p.theta);
  const double px = x_rel - p.tr_x;
  const double qy = y_rel - p.tr_y;
  const double inv_s = 1.0 / p.s;
  Vec2 out;
  out.x = inv_s * (px * (c + p.sh_y * n) + qy * (n + p.sh_x * c));
  out.y = inv_s * (px * (-n + p.sh_y * c) + qy * (c - p.sh_x * n));
  return out;
}

}  // namespace annofix
