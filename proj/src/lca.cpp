#include "annofix/lca.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "annofix/kernels.hpp"

namespace annofix::lca {

namespace {

constexpr double kMinScale = 0.05;

RegionMeans means_of(const RasterImage& img, const LevelSet& phi) {
  const kernels::RegionSums sums = kernels::region_sums(img, phi);
  RegionMeans out;
  const long n_all = sums.n_fg + sums.n_bg;
  for (int ch = 0; ch < img.num_channels(); ++ch) {
    const double global = (sums.sum_fg[ch] + sums.sum_bg[ch]) / static_cast<double>(n_all);
    out.c1[ch] = sums.n_fg > 0 ? sums.sum_fg[ch] / static_cast<double>(sums.n_fg) : global;
    out.c2[ch] = sums.n_bg > 0 ? sums.sum_bg[ch] / static_cast<double>(sums.n_bg) : global;
  }
  out.degenerate = (sums.n_fg == 0 || sums.n_bg == 0);
  return out;
}

LevelSet mask_to_sign(const BinaryMask& m) {
  LevelSet ls(m.width, m.height);
  for (std::size_t i = 0; i < m.size(); ++i) ls.values[i] = m.bits[i] ? 1.0 : -1.0;
  return ls;
}

long fg_area(const LevelSet& phi) {
  long n = 0;
  for (double v : phi.values) n += v >= 0.0 ? 1 : 0;
  return n;
}

kernels::WarpSpec make_warp_spec(const ShapePrior& prior, const AffineParams& p,
                                 kernels::Border border) {
  kernels::WarpSpec spec;
  spec.params = p;
  spec.center = prior.center;
  spec.border = border;
  spec.background = -1.0;
  return spec;
}

/// Root-mean-square distance of support pixels from the affine center; the
/// lever arm converting rotation/scale/shear gradients to pixel units.
double lever_arm(const ShapePrior& prior) {
  double acc = 0.0;
  long n = 0;
  for (int y = 0; y < prior.support.height; ++y) {
    for (int x = 0; x < prior.support.width; ++x) {
      if (!prior.support.at(x, y)) continue;
      const double dx = x - prior.center.x;
      const double dy = y - prior.center.y;
      acc += dx * dx + dy * dy;
      ++n;
    }
  }
  if (n == 0) return 1.0;
  return std::max(1.0, std::sqrt(acc / static_cast<double>(n)));
}

double auto_lambda(const RasterImage& img, const LevelSet& phi, const LevelSet& poi,
                   const LevelSet& shape, const RegionMeans& means) {
  // Balance the two terms of the objective at iteration 0.
  double color = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    double d1 = 0.0;
    double d2 = 0.0;
    for (int ch = 0; ch < img.num_channels(); ++ch) {
      const double u = img.channels[ch].values[i];
      d1 += (u - means.c1[ch]) * (u - means.c1[ch]);
      d2 += (u - means.c2[ch]) * (u - means.c2[ch]);
    }
    color += std::abs(d1 - d2);
  }
  const double mismatch = kernels::shape_mismatch_sum(phi, poi, shape);
  if (mismatch <= 0.0) return 0.0;
  return color / mismatch;
}

}  // namespace

ShapePrior make_shape_prior(const BinaryMask& prior_mask, double blur_sigma, double heaviside_eps) {
  ShapePrior prior;
  ScalarGrid soft(prior_mask.width, prior_mask.height);
  double sum_x = 0.0;
  double sum_y = 0.0;
  long n = 0;
  for (int y = 0; y < prior_mask.height; ++y) {
    for (int x = 0; x < prior_mask.width; ++x) {
      if (prior_mask.at(x, y)) {
        soft.at(x, y) = 1.0;
        sum_x += x;
        sum_y += y;
        ++n;
      }
    }
  }
  prior.center = n > 0 ? Vec2{sum_x / n, sum_y / n}
                       : Vec2{0.5 * (prior_mask.width - 1), 0.5 * (prior_mask.height - 1)};
  kernels::gaussian_blur(soft, blur_sigma, prior.tmpl);
  for (double& v : prior.tmpl.values) v -= 0.5;
  kernels::heaviside_mask(prior.tmpl, prior.support);
  prior.heaviside_eps = heaviside_eps;
  prior.blur_sigma = blur_sigma;
  return prior;
}

double energy(const RasterImage& img, const LevelSet& phi, const LevelSet& poi,
              const LevelSet& shape, const Color& c1, const Color& c2, double lambda) {
  return kernels::cv_energy_sum(img, phi, c1, c2) +
         lambda * kernels::shape_mismatch_sum(phi, poi, shape);
}

LevelSet update_phi(const RasterImage& img, const LevelSet& phi, const LevelSet& poi,
                    const LevelSet& shape, const Color& c1, const Color& c2, double lambda) {
  LevelSet out;
  kernels::lca_sign_update(img, phi, poi, shape, c1, c2, lambda, out);
  return out;
}

LevelSet update_poi(const LevelSet& phi, const LevelSet& poi, const LevelSet& shape,
                    const BinaryMask& initial_support) {
  LevelSet out;
  kernels::poi_sign_update(phi, poi, shape, initial_support, out);
  return out;
}

LevelSet warp_shape(const ScalarGrid& tmpl, const AffineParams& params, Vec2 center) {
  if (params.s <= 0.0) throw std::invalid_argument("warp_shape: scale must be > 0");
  LevelSet out(tmpl.width, tmpl.height);
  kernels::WarpSpec spec;
  spec.params = params;
  spec.center = center;
  spec.border = kernels::Border::constant_background;
  spec.background = -1.0;
  kernels::warp_bilinear(tmpl, spec, out);
  return out;
}

namespace {

/// Desired-foreground mask softened like the prior template, so the residual
/// compares two fields smoothed the same way.
ScalarGrid soften_foreground(const LevelSet& phi, const LevelSet& poi, const ShapePrior& prior) {
  ScalarGrid hard(phi.width, phi.height);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    hard.values[i] = (phi.values[i] >= 0.0 && poi.values[i] >= 0.0) ? 1.0 : 0.0;
  }
  ScalarGrid soft;
  kernels::gaussian_blur(hard, prior.blur_sigma, soft);
  for (double& v : soft.values) v -= 0.5;
  return soft;
}

}  // namespace

AffineGradients affine_gradients(const LevelSet& phi, const LevelSet& poi, const ShapePrior& prior,
                                 const AffineParams& params, double lambda) {
  const ScalarGrid fg = soften_foreground(phi, poi, prior);
  const kernels::ShapeGradSums sums = kernels::shape_gradient_sums(
      fg, prior.tmpl, make_warp_spec(prior, params, kernels::Border::clamp), prior.heaviside_eps,
      lambda);
  AffineGradients out;
  out.g = sums.g;
  out.residual_px = sums.residual_px;
  return out;
}

double shape_energy_smooth(const LevelSet& phi, const LevelSet& poi, const ShapePrior& prior,
                           const AffineParams& params, double lambda) {
  const ScalarGrid fg = soften_foreground(phi, poi, prior);
  return kernels::shape_energy_smooth_sum(fg, prior.tmpl,
                                          make_warp_spec(prior, params, kernels::Border::clamp),
                                          prior.heaviside_eps, lambda);
}

ShapeUpdate update_shape(const LevelSet& phi, const LevelSet& poi, const ShapePrior& prior,
                         const AffineParams& params, double lambda, const LcaOptions& opts) {
  const AffineGradients grads = affine_gradients(phi, poi, prior, params, lambda);

  std::array<double, 6> step{};
  if (opts.conditioning == GradConditioning::residual_count) {
    const double n = static_cast<double>(std::max<long>(1, grads.residual_px));
    for (int k = 0; k < 6; ++k) step[k] = grads.g[k] / n;
  } else {
    // Express the gradient in pixel-displacement units (a unit change of
    // scale/angle/shear moves points by about the lever arm), take the unit
    // descent direction there, and apply the per-parameter step sizes.
    const double arm = lever_arm(prior);
    std::array<double, 6> u = grads.g;
    for (int k = 2; k < 6; ++k) u[k] /= arm;
    double norm = 0.0;
    for (double v : u) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (int k = 0; k < 6; ++k) step[k] = u[k] / norm;
    }
  }

  ShapeUpdate out;
  out.params = params;
  const AffineStepSizes& sz = opts.affine_step_sizes;
  out.params.tr_x -= sz.translation * step[0];
  out.params.tr_y -= sz.translation * step[1];
  out.params.s -= sz.scale * step[2];
  out.params.theta -= sz.theta * step[3];
  out.params.sh_x -= sz.shear * step[4];
  out.params.sh_y -= sz.shear * step[5];
  if (out.params.s <= kMinScale) {
    out.params.s = kMinScale;
    out.scale_clamped = true;
  }

  const LevelSet candidate = warp_shape(prior.tmpl, out.params, prior.center);
  kernels::shape_sign_update(phi, poi, candidate, prior.support, out.shape);
  return out;
}

CorrectionResult run(const RasterImage& img, const BinaryMask& prior_shape, const BinaryMask& poi,
                     const LcaOptions& opts) {
  validate_image(img);
  const int w = img.width();
  const int h = img.height();
  if (!prior_shape.same_dims(w, h) || !poi.same_dims(w, h)) {
    throw std::invalid_argument("lca::run: mask dimensions differ from image");
  }

  CorrectionResult result;
  result.corrected_mask = BinaryMask(w, h, 0);
  result.final_affine = AffineParams::identity();
  if (poi.empty_mask()) {
    result.verdict = Verdict::rejected_false;
    return result;
  }
  for (std::size_t i = 0; i < poi.size(); ++i) {
    if (prior_shape.bits[i] && !poi.bits[i]) {
      result.prior_outside_poi = true;
      break;
    }
  }

  RasterImage work = img;
  if (opts.color_mode == ColorMode::luminance && img.num_channels() > 1) {
    work = RasterImage(to_intensity(img));
  }

  const ShapePrior prior = make_shape_prior(prior_shape, opts.shape_blur_sigma, opts.heaviside_eps);
  LevelSet phi = mask_to_sign(poi);
  LevelSet poi_field = phi;
  LevelSet shape = prior.tmpl;
  AffineParams params = AffineParams::identity();

  RegionMeans means = means_of(work, phi);
  result.degenerate = means.degenerate;
  double lambda = opts.lambda;
  if (opts.auto_lambda) lambda = auto_lambda(work, phi, poi_field, shape, means);
  result.lambda_used = lambda;

  double prev = energy(work, phi, poi_field, shape, means.c1, means.c2, lambda);
  result.trace.push_back({prev, means.c1, means.c2, fg_area(phi)});

  int stall = 0;
  for (int it = 0; it < opts.max_iters; ++it) {
    phi = update_phi(work, phi, poi_field, shape, means.c1, means.c2, lambda);
    poi_field = update_poi(phi, poi_field, shape, poi);
    ShapeUpdate su = update_shape(phi, poi_field, prior, params, lambda, opts);
    shape = std::move(su.shape);
    params = su.params;
    result.scale_clamped = result.scale_clamped || su.scale_clamped;
    result.iterations = it + 1;

    // Shrink monitor: the fields must stay inside their initial supports.
    for (std::size_t i = 0; i < poi.size(); ++i) {
      if (poi_field.values[i] >= 0.0 && !poi.bits[i]) ++result.shrink_violations;
      if (shape.values[i] >= 0.0 && !prior.support.bits[i]) ++result.shrink_violations;
    }

    means = means_of(work, phi);
    result.degenerate = result.degenerate || means.degenerate;
    const double now = energy(work, phi, poi_field, shape, means.c1, means.c2, lambda);
    result.trace.push_back({now, means.c1, means.c2, fg_area(phi)});
    if (now > prev + 1e-6 * std::max(1.0, std::abs(prev))) result.energy_monotone = false;

    if (std::abs(prev - now) <= opts.energy_tol) {
      if (++stall >= opts.stall_patience) {
        prev = now;
        break;
      }
    } else {
      stall = 0;
    }
    prev = now;
  }

  result.final_affine = params;
  BinaryMask mask(w, h, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask.bits[i] = (phi.values[i] >= 0.0 && poi_field.values[i] >= 0.0) ? 1 : 0;
  }

  const BinaryMask final_shape = heaviside(warp_shape(prior.tmpl, params, prior.center));
  long inter = 0;
  long shape_px = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (final_shape.bits[i]) {
      ++shape_px;
      if (mask.bits[i]) ++inter;
    }
  }
  result.overlap_ratio =
      shape_px > 0 ? static_cast<double>(inter) / static_cast<double>(shape_px) : 0.0;
  result.fill_ratio = static_cast<double>(mask.count()) / static_cast<double>(poi.count());

  // A found foreground that floods the candidate region is the two-phase
  // split landing on the background class: nothing line-like was found.
  if (mask.empty_mask() || result.overlap_ratio < opts.reject_overlap_min ||
      result.fill_ratio > opts.reject_fill_max) {
    result.verdict = Verdict::rejected_false;
    // Rejected tiles contribute nothing.
  } else {
    result.verdict = Verdict::accepted;
    result.corrected_mask = std::move(mask);
  }
  return result;
}

}  // namespace annofix::lca
