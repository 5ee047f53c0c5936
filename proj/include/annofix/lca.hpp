#pragma once

#include <array>

#include "annofix/affine.hpp"
#include "annofix/chanvese.hpp"
#include "annofix/grid.hpp"

namespace annofix::lca {

using chanvese::EnergyTrace;

struct AffineStepSizes {
  double translation = 0.5;  // px per unit normalized gradient
  double scale = 0.005;
  double theta = 0.01;  // radians
  double shear = 0.005;
};

/// How raw gradient sums are conditioned before a descent step.
enum class GradConditioning {
  residual_count,  // divide by the number of residual pixels
  unit_direction,  // lever-arm preconditioning, then normalize to unit length
};

struct LcaOptions {
  double lambda = 3.0;
  bool auto_lambda = false;  // balance the shape term against the color term at iteration 0
  int max_iters = 300;
  double energy_tol = 0.0;
  AffineStepSizes affine_step_sizes{};
  double reject_overlap_min = 0.2;  // accepted-overlap fraction below which a tile is false
  double reject_fill_max = 0.5;     // foreground filling more of the poi than this is no find
  double shape_blur_sigma = 1.5;
  double heaviside_eps = 0.45;  // smoothing half-width for the registration gradients
  ColorMode color_mode = ColorMode::multichannel;
  GradConditioning conditioning = GradConditioning::unit_direction;
  int stall_patience = 5;  // iterations with unchanged energy before stopping
};

enum class Verdict { accepted, rejected_false };

struct CorrectionResult {
  BinaryMask corrected_mask;  // H(phi)*H(L); cleared when rejected
  AffineParams final_affine;
  EnergyTrace trace;
  Verdict verdict = Verdict::rejected_false;
  int iterations = 0;
  double lambda_used = 0.0;
  double overlap_ratio = 0.0;  // |mask & final shape| / |final shape|
  double fill_ratio = 0.0;     // |mask| / |poi|
  bool scale_clamped = false;
  bool energy_monotone = true;  // no iteration raised the energy beyond 1e-6 relative
  long shrink_violations = 0;   // pixels ever positive outside the initial supports
  bool degenerate = false;
  bool prior_outside_poi = false;
};

/// Prior shape prepared for registration: blurred to make spatial derivatives
/// meaningful, recentered to [-0.5, 0.5], with the affine center at the mask
/// centroid.
struct ShapePrior {
  ScalarGrid tmpl;
  Vec2 center;
  BinaryMask support;  // H(tmpl): the initial warped support
  double heaviside_eps = 0.45;
  double blur_sigma = 1.5;  // the desired-foreground side is softened alike
};

ShapePrior make_shape_prior(const BinaryMask& prior_mask, double blur_sigma,
                            double heaviside_eps = 0.45);

/// Color term plus lambda * sum (H(phi)H(L) - H(psi))^2.
double energy(const RasterImage& img, const LevelSet& phi, const LevelSet& poi,
              const LevelSet& shape, const Color& c1, const Color& c2, double lambda);

/// Sign update of the segmentation field under color evidence and shape
/// pressure gated by H(L). Reduces to the plain two-phase update at lambda=0.
LevelSet update_phi(const RasterImage& img, const LevelSet& phi, const LevelSet& poi,
                    const LevelSet& shape, const Color& c1, const Color& c2, double lambda);

/// Pixels-of-interest update, restricted to the initial support.
LevelSet update_poi(const LevelSet& phi, const LevelSet& poi, const LevelSet& shape,
                    const BinaryMask& initial_support);

/// Affine warp of the template about `center`; samples outside the template
/// domain read as background (-1).
LevelSet warp_shape(const ScalarGrid& tmpl, const AffineParams& params, Vec2 center);

struct AffineGradients {
  std::array<double, 6> g{};  // d/d(tr_x, tr_y, s, theta, sh_x, sh_y)
  long residual_px = 0;
};

/// Gradients of the smoothed shape term with respect to the affine
/// parameters. Matches central finite differences of shape_energy_smooth.
AffineGradients affine_gradients(const LevelSet& phi, const LevelSet& poi, const ShapePrior& prior,
                                 const AffineParams& params, double lambda);

/// The smoothed shape term itself (the function the gradients differentiate).
double shape_energy_smooth(const LevelSet& phi, const LevelSet& poi, const ShapePrior& prior,
                           const AffineParams& params, double lambda);

struct ShapeUpdate {
  LevelSet shape;
  AffineParams params;
  bool scale_clamped = false;
};

/// One descent step on the affine parameters, re-warp, then threshold within
/// the initial support.
ShapeUpdate update_shape(const LevelSet& phi, const LevelSet& poi, const ShapePrior& prior,
                         const AffineParams& params, double lambda, const LcaOptions& opts);

/// Full label-correction run on one image window.
CorrectionResult run(const RasterImage& img, const BinaryMask& prior_shape, const BinaryMask& poi,
                     const LcaOptions& opts = {});

}  // namespace annofix::lca
