#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "annofix/affine.hpp"
#include "annofix/grid.hpp"

// Data-parallel inner loops shared by the segmentation algorithms.
//
// Every kernel exists twice with identical semantics: the OpenMP version in
// annofix::kernels (the production path) and a plain serial version in
// annofix::kernels::ref kept for testing and benchmarking. Both are required
// to produce bit-identical outputs for the same inputs, independent of the
// OpenMP thread count. Elementwise kernels get this for free; reductions sum
// per-row partials and fold the rows in a fixed order.

namespace annofix::kernels {

struct RegionSums {
  std::array<double, 3> sum_fg{};
  std::array<double, 3> sum_bg{};
  long n_fg = 0;
  long n_bg = 0;
};

struct ShapeGradSums {
  std::array<double, 6> g{};  // d/d(tr_x, tr_y, s, theta, sh_x, sh_y)
  long residual_px = 0;       // pixels where the smoothed masks disagree by > 0.5
};

enum class Border { constant_background, clamp };

struct WarpSpec {
  AffineParams params;
  Vec2 center;
  Border border = Border::constant_background;
  double background = -1.0;  // sample value outside the template domain
};

// --- elementwise kernels ---------------------------------------------------

void heaviside_mask(const ScalarGrid& field, BinaryMask& out);

/// phi' = +1 where sum_ch (u-c1)^2 <= sum_ch (u-c2)^2, else -1.
void cv_sign_update(const RasterImage& img, const Color& c1, const Color& c2, ScalarGrid& out);

/// phi' = +1 where -[(u-c1)^2-(u-c2)^2 + 2*lambda*H(L)*(H(phi)H(L)-H(psi))] >= 0.
void lca_sign_update(const RasterImage& img, const ScalarGrid& phi, const ScalarGrid& poi,
                     const ScalarGrid& shape, const Color& c1, const Color& c2, double lambda,
                     ScalarGrid& out);

/// Within support: L' = +1 iff H(phi)*[H(phi)H(L) - H(psi)] >= 0; outside: -1.
void poi_sign_update(const ScalarGrid& phi, const ScalarGrid& poi, const ScalarGrid& shape,
                     const BinaryMask& support, ScalarGrid& out);

/// Within support: psi' = +1 iff H(phi)H(L) - H(psi_candidate) >= 0; outside: -1.
void shape_sign_update(const ScalarGrid& phi, const ScalarGrid& poi, const ScalarGrid& candidate,
                       const BinaryMask& support, ScalarGrid& out);

/// Bilinear sample of the template through the affine pullback, scaled by s.
void warp_bilinear(const ScalarGrid& tmpl, const WarpSpec& spec, ScalarGrid& out);

/// Separable Gaussian blur, kernel radius ceil(3*sigma). sigma <= 0 copies.
void gaussian_blur(const ScalarGrid& in, double sigma, ScalarGrid& out);

// --- reductions (fixed row-fold order) --------------------------------------

RegionSums region_sums(const RasterImage& img, const ScalarGrid& phi);

double cv_energy_sum(const RasterImage& img, const ScalarGrid& phi, const Color& c1,
                     const Color& c2);

/// Sum of (H(phi)H(L) - H(psi))^2.
double shape_mismatch_sum(const ScalarGrid& phi, const ScalarGrid& poi, const ScalarGrid& shape);

/// lambda * sum (H_eps(fg_soft) - H_eps(w))^2 with w the smooth warp of tmpl
/// under spec. Both sides of the residual are smoothed fields so aligned
/// edges cancel exactly.
double shape_energy_smooth_sum(const ScalarGrid& fg_soft, const ScalarGrid& tmpl,
                               const WarpSpec& spec, double heaviside_eps, double lambda);

/// Analytic gradient of shape_energy_smooth_sum with respect to the six
/// affine parameters, via the chain rule through the C^1 template sampler.
ShapeGradSums shape_gradient_sums(const ScalarGrid& fg_soft, const ScalarGrid& tmpl,
                                  const WarpSpec& spec, double heaviside_eps, double lambda);

namespace ref {

void heaviside_mask(const ScalarGrid& field, BinaryMask& out);
void cv_sign_update(const RasterImage& img, const Color& c1, const Color& c2, ScalarGrid& out);
void lca_sign_update(const RasterImage& img, const ScalarGrid& phi, const ScalarGrid& poi,
                     const ScalarGrid& shape, const Color& c1, const Color& c2, double lambda,
                     ScalarGrid& out);
void poi_sign_update(const ScalarGrid& phi, const ScalarGrid& poi, const ScalarGrid& shape,
                     const BinaryMask& support, ScalarGrid& out);
void shape_sign_update(const ScalarGrid& phi, const ScalarGrid& poi, const ScalarGrid& candidate,
                       const BinaryMask& support, ScalarGrid& out);
void warp_bilinear(const ScalarGrid& tmpl, const WarpSpec& spec, ScalarGrid& out);
void gaussian_blur(const ScalarGrid& in, double sigma, ScalarGrid& out);
RegionSums region_sums(const RasterImage& img, const ScalarGrid& phi);
double cv_energy_sum(const RasterImage& img, const ScalarGrid& phi, const Color& c1,
                     const Color& c2);
double shape_mismatch_sum(const ScalarGrid& phi, const ScalarGrid& poi, const ScalarGrid& shape);
double shape_energy_smooth_sum(const ScalarGrid& fg_soft, const ScalarGrid& tmpl,
                               const WarpSpec& spec, double heaviside_eps, double lambda);
ShapeGradSums shape_gradient_sums(const ScalarGrid& fg_soft, const ScalarGrid& tmpl,
                                  const WarpSpec& spec, double heaviside_eps, double lambda);

}  // namespace ref

}  // namespace annofix::kernels
