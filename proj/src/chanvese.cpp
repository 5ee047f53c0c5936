#include "annofix/chanvese.hpp"

#include <cmath>
#include <stdexcept>

#include "annofix/kernels.hpp"

namespace annofix::chanvese {

namespace {

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

long fg_area(const LevelSet& phi) {
  long n = 0;
  for (double v : phi.values) n += v >= 0.0 ? 1 : 0;
  return n;
}

bool is_constant(const RasterImage& img) {
  for (const ScalarGrid& ch : img.channels) {
    for (double v : ch.values) {
      if (v != ch.values[0]) return false;
    }
  }
  return true;
}

}  // namespace

double energy(const RasterImage& img, const LevelSet& phi, const Color& c1, const Color& c2) {
  if (!img.same_dims(phi.width, phi.height)) {
    throw std::invalid_argument("chanvese::energy: dimensions differ");
  }
  return kernels::cv_energy_sum(img, phi, c1, c2);
}

LevelSet step(const RasterImage& img, const Color& c1, const Color& c2) {
  LevelSet out;
  kernels::cv_sign_update(img, c1, c2, out);
  return out;
}

LevelSet checkerboard_init(int width, int height, int period) {
  LevelSet phi(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      phi.at(x, y) = ((x / period) + (y / period)) % 2 == 0 ? 1.0 : -1.0;
    }
  }
  return phi;
}

CvResult segment(const RasterImage& img, std::optional<LevelSet> init, const CvOptions& opts) {
  validate_image(img);
  if (opts.max_iters < 1) throw std::invalid_argument("CvOptions: max_iters must be >= 1");
  if (opts.energy_tol < 0.0) throw std::invalid_argument("CvOptions: energy_tol must be >= 0");

  RasterImage work = img;
  if (opts.color_mode == ColorMode::luminance && img.num_channels() > 1) {
    work = RasterImage(to_intensity(img));
  }

  LevelSet phi = init ? std::move(*init) : checkerboard_init(work.width(), work.height());
  if (!work.same_dims(phi.width, phi.height)) {
    throw std::invalid_argument("cv_segment: init dimensions differ from image");
  }

  CvResult result;
  RegionMeans means = means_of(work, phi);
  result.degenerate = means.degenerate;
  double prev = kernels::cv_energy_sum(work, phi, means.c1, means.c2);
  result.trace.push_back({prev, means.c1, means.c2, fg_area(phi)});

  if (is_constant(work)) {
    // No gradient anywhere; the sign update would send every tie to the
    // foreground, so keep the caller's partition instead.
    result.degenerate = true;
    result.mask = heaviside(phi);
    return result;
  }

  for (int it = 0; it < opts.max_iters; ++it) {
    LevelSet next;
    kernels::cv_sign_update(work, means.c1, means.c2, next);
    phi = std::move(next);
    means = means_of(work, phi);
    result.degenerate = result.degenerate || means.degenerate;
    const double now = kernels::cv_energy_sum(work, phi, means.c1, means.c2);
    result.trace.push_back({now, means.c1, means.c2, fg_area(phi)});
    if (std::abs(prev - now) <= opts.energy_tol) break;
    prev = now;
  }

  result.mask = heaviside(phi);
  return result;
}

}  // namespace annofix::chanvese
