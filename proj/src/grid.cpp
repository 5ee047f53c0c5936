#include "annofix/grid.hpp"

#include <cmath>

#include "annofix/kernels.hpp"

namespace annofix {

BinaryMask heaviside(const LevelSet& ls) {
  BinaryMask out;
  kernels::heaviside_mask(ls, out);
  return out;
}

RegionMeans region_means(const RasterImage& img, const BinaryMask& mask) {
  if (!img.same_dims(mask.width, mask.height)) {
    throw std::invalid_argument("region_means: image and mask dimensions differ");
  }
  // Reuse the level-set reduction; the mask maps to a +-1 field.
  ScalarGrid phi(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.size(); ++i) phi.values[i] = mask.bits[i] ? 1.0 : -1.0;
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

ScalarGrid to_intensity(const RasterImage& img) {
  validate_image(img);
  if (img.num_channels() == 1) return img.channels[0];
  const ScalarGrid& r = img.channels[0];
  const ScalarGrid& g = img.channels[1];
  const ScalarGrid& b = img.channels[2];
  ScalarGrid out(r.width, r.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values[i] = 0.299 * r.values[i] + 0.587 * g.values[i] + 0.114 * b.values[i];
  }
  return out;
}

void validate_image(const RasterImage& img) {
  const int n = img.num_channels();
  if (n != 1 && n != 3) throw std::invalid_argument("RasterImage: channel count must be 1 or 3");
  for (const ScalarGrid& ch : img.channels) {
    if (!ch.same_dims(img.width(), img.height())) {
      throw std::invalid_argument("RasterImage: channels must be dimension-equal");
    }
    for (double v : ch.values) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw std::invalid_argument("RasterImage: samples must be finite and in [0,1]");
      }
    }
  }
}

}  // namespace annofix
