#pragma once

#include <cmath>

#include "annofix/grid.hpp"

namespace annofix {

inline constexpr double kPi = 3.14159265358979323846;

/// Value and spatial derivatives of the bilinear interpolant at (x, y).
/// Derivatives are exact within the interpolation cell and zero where the
/// sample is clamped or constant.
struct BilinearSample {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

enum class SampleBorder { constant, clamp };

inline BilinearSample sample_bilinear(const ScalarGrid& g, double x, double y, SampleBorder border,
                                      double background) {
  BilinearSample s;
  const double xmax = static_cast<double>(g.width - 1);
  const double ymax = static_cast<double>(g.height - 1);
  bool clamped_x = false;
  bool clamped_y = false;
  if (border == SampleBorder::constant) {
    if (x < 0.0 || x > xmax || y < 0.0 || y > ymax) {
      s.value = background;
      return s;
    }
  } else {
    if (x < 0.0) { x = 0.0; clamped_x = true; }
    if (x > xmax) { x = xmax; clamped_x = true; }
    if (y < 0.0) { y = 0.0; clamped_y = true; }
    if (y > ymax) { y = ymax; clamped_y = true; }
  }
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  if (x0 > g.width - 2) x0 = g.width - 2;
  if (y0 > g.height - 2) y0 = g.height - 2;
  if (x0 < 0) x0 = 0;
  if (y0 < 0) y0 = 0;
  const double fx = x - x0;
  const double fy = y - y0;
  const int x1 = (g.width > 1) ? x0 + 1 : x0;
  const int y1 = (g.height > 1) ? y0 + 1 : y0;
  const double v00 = g.at(x0, y0);
  const double v10 = g.at(x1, y0);
  const double v01 = g.at(x0, y1);
  const double v11 = g.at(x1, y1);
  s.value = v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) + v01 * (1.0 - fx) * fy +
            v11 * fx * fy;
  s.dx = clamped_x ? 0.0 : (v10 - v00) * (1.0 - fy) + (v11 - v01) * fy;
  s.dy = clamped_y ? 0.0 : (v01 - v00) * (1.0 - fx) + (v11 - v10) * fx;
  return s;
}

/// Catmull-Rom bicubic sample with exact spatial derivatives. C^1 across
/// cell boundaries, which the finite-difference contract on the registration
/// gradients needs; constant regions reproduce exactly with zero derivative.
/// Indices clamp at the border (replicated edges).
inline BilinearSample sample_catmullrom(const ScalarGrid& g, double x, double y) {
  const double xmax = static_cast<double>(g.width - 1);
  const double ymax = static_cast<double>(g.height - 1);
  bool clamped_x = false;
  bool clamped_y = false;
  if (x < 0.0) { x = 0.0; clamped_x = true; }
  if (x > xmax) { x = xmax; clamped_x = true; }
  if (y < 0.0) { y = 0.0; clamped_y = true; }
  if (y > ymax) { y = ymax; clamped_y = true; }
  int x1 = static_cast<int>(std::floor(x));
  int y1 = static_cast<int>(std::floor(y));
  if (x1 > g.width - 2) x1 = g.width - 2;
  if (y1 > g.height - 2) y1 = g.height - 2;
  if (x1 < 0) x1 = 0;
  if (y1 < 0) y1 = 0;
  const double fx = x - x1;
  const double fy = y - y1;

  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
  auto spline = [](double p0, double p1, double p2, double p3, double t, double& deriv) {
    const double c1 = 0.5 * (p2 - p0);
    const double c2 = 0.5 * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3);
    const double c3 = 0.5 * (-p0 + 3.0 * p1 - 3.0 * p2 + p3);
    deriv = c1 + t * (2.0 * c2 + t * 3.0 * c3);
    return p1 + t * (c1 + t * (c2 + t * c3));
  };

  double col_val[4];
  double col_dx[4];
  for (int r = 0; r < 4; ++r) {
    const int yy = clampi(y1 - 1 + r, g.height - 1);
    const double p0 = g.at(clampi(x1 - 1, g.width - 1), yy);
    const double p1 = g.at(x1, yy);
    const double p2 = g.at(clampi(x1 + 1, g.width - 1), yy);
    const double p3 = g.at(clampi(x1 + 2, g.width - 1), yy);
    col_val[r] = spline(p0, p1, p2, p3, fx, col_dx[r]);
  }
  BilinearSample s;
  double dvdy = 0.0;
  s.value = spline(col_val[0], col_val[1], col_val[2], col_val[3], fy, dvdy);
  double ddum = 0.0;
  s.dx = clamped_x ? 0.0 : spline(col_dx[0], col_dx[1], col_dx[2], col_dx[3], fy, ddum);
  s.dy = clamped_y ? 0.0 : dvdy;
  return s;
}

/// Compactly supported C^2 smoothing of the Heaviside step: exactly 0 below
/// -eps, exactly 1 above +eps, a raised-cosine ramp in between. Outside the
/// band the derivative vanishes identically, so configurations that agree
/// with margin produce exactly zero gradients.
inline double smooth_heaviside(double v, double eps) {
  if (v <= -eps) return 0.0;
  if (v >= eps) return 1.0;
  return 0.5 * (1.0 + v / eps + std::sin(kPi * v / eps) / kPi);
}

inline double smooth_delta(double v, double eps) {
  if (v <= -eps || v >= eps) return 0.0;
  return (0.5 / eps) * (1.0 + std::cos(kPi * v / eps));
}

}  // namespace annofix
