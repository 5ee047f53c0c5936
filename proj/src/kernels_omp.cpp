#include "annofix/kernels.hpp"

#include <cmath>

#include "annofix/sampling.hpp"

// OpenMP backend. Loops are parallel over rows; reductions store per-row
// partials and fold them serially in row order so results do not depend on
// the thread count.

namespace annofix::kernels {

namespace {

inline double color_dist2(const RasterImage& img, std::size_t idx, const Color& c) {
  double d = 0.0;
  for (int ch = 0; ch < img.num_channels(); ++ch) {
    const double r = img.channels[ch].values[idx] - c[ch];
    d += r * r;
  }
  return d;
}

inline SampleBorder to_sample_border(Border b) {
  return b == Border::clamp ? SampleBorder::clamp : SampleBorder::constant;
}

}  // namespace

void heaviside_mask(const ScalarGrid& field, BinaryMask& out) {
  out.width = field.width;
  out.height = field.height;
  out.bits.assign(field.size(), 0);
  const int h = field.height;
  const int w = field.width;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      out.bits[row + x] = field.values[row + x] >= 0.0 ? 1 : 0;
    }
  }
}

void cv_sign_update(const RasterImage& img, const Color& c1, const Color& c2, ScalarGrid& out) {
  const int w = img.width();
  const int h = img.height();
  out.width = w;
  out.height = h;
  out.values.resize(static_cast<std::size_t>(w) * h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = row + x;
      out.values[i] = color_dist2(img, i, c1) <= color_dist2(img, i, c2) ? 1.0 : -1.0;
    }
  }
}

void lca_sign_update(const RasterImage& img, const ScalarGrid& phi, const ScalarGrid& poi,
                     const ScalarGrid& shape, const Color& c1, const Color& c2, double lambda,
                     ScalarGrid& out) {
  const int w = img.width();
  const int h = img.height();
  out.width = w;
  out.height = h;
  out.values.resize(static_cast<std::size_t>(w) * h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = row + x;
      const double h_phi = phi.values[i] >= 0.0 ? 1.0 : 0.0;
      const double h_poi = poi.values[i] >= 0.0 ? 1.0 : 0.0;
      const double h_psi = shape.values[i] >= 0.0 ? 1.0 : 0.0;
      const double pressure = 2.0 * lambda * h_poi * (h_phi * h_poi - h_psi);
      const double force = -(color_dist2(img, i, c1) - color_dist2(img, i, c2) + pressure);
      out.values[i] = force >= 0.0 ? 1.0 : -1.0;
    }
  }
}

void poi_sign_update(const ScalarGrid& phi, const ScalarGrid& poi, const ScalarGrid& shape,
                     const BinaryMask& support, ScalarGrid& out) {
  const int w = phi.width;
  const int h = phi.height;
  out.width = w;
  out.height = h;
  out.values.resize(static_cast<std::size_t>(w) * h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = row + x;
      if (!support.bits[i]) {
        out.values[i] = -1.0;
        continue;
      }
      const double h_phi = phi.values[i] >= 0.0 ? 1.0 : 0.0;
      const double h_poi = poi.values[i] >= 0.0 ? 1.0 : 0.0;
      const double h_psi = shape.values[i] >= 0.0 ? 1.0 : 0.0;
      out.values[i] = h_phi * (h_phi * h_poi - h_psi) >= 0.0 ? 1.0 : -1.0;
    }
  }
}

void shape_sign_update(const ScalarGrid& phi, const ScalarGrid& poi, const ScalarGrid& candidate,
                       const BinaryMask& support, ScalarGrid& out) {
  const int w = phi.width;
  const int h = phi.height;
  out.width = w;
  out.height = h;
  out.values.resize(static_cast<std::size_t>(w) * h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = row + x;
      if (!support.bits[i]) {
        out.values[i] = -1.0;
        continue;
      }
      const double m = (phi.values[i] >= 0.0 && poi.values[i] >= 0.0) ? 1.0 : 0.0;
      const double h_cand = candidate.values[i] >= 0.0 ? 1.0 : 0.0;
      out.values[i] = m - h_cand >= 0.0 ? 1.0 : -1.0;
    }
  }
}

void warp_bilinear(const ScalarGrid& tmpl, const WarpSpec& spec, ScalarGrid& out) {
  const int w = out.width;
  const int h = out.height;
  const SampleBorder border = to_sample_border(spec.border);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const Vec2 pull = affine_pullback(spec.params, x - spec.center.x, y - spec.center.y);
      const BilinearSample smp = sample_bilinear(tmpl, spec.center.x + pull.x,
                                                 spec.center.y + pull.y, border, spec.background);
      out.values[row + x] = spec.params.s * smp.value;
    }
  }
}

void gaussian_blur(const ScalarGrid& in, double sigma, ScalarGrid& out) {
  if (sigma <= 0.0) {
    out = in;
    return;
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;

  const int w = in.width;
  const int h = in.height;
  ScalarGrid tmp(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int xs = x + i;
        if (xs < 0) xs = 0;
        if (xs > w - 1) xs = w - 1;
        acc += k[i + radius] * in.at(xs, y);
      }
      tmp.at(x, y) = acc;
    }
  }
  out.width = w;
  out.height = h;
  out.values.resize(in.size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int ys = y + i;
        if (ys < 0) ys = 0;
        if (ys > h - 1) ys = h - 1;
        acc += k[i + radius] * tmp.at(x, ys);
      }
      out.at(x, y) = acc;
    }
  }
}

RegionSums region_sums(const RasterImage& img, const ScalarGrid& phi) {
  const int w = img.width();
  const int h = img.height();
  const int nch = img.num_channels();
  std::vector<RegionSums> rows(static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    RegionSums r;
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = row + x;
      if (phi.values[i] >= 0.0) {
        for (int ch = 0; ch < nch; ++ch) r.sum_fg[ch] += img.channels[ch].values[i];
        ++r.n_fg;
      } else {
        for (int ch = 0; ch < nch; ++ch) r.sum_bg[ch] += img.channels[ch].values[i];
        ++r.n_bg;
      }
    }
    rows[y] = r;
  }
  RegionSums total;
  for (int y = 0; y < h; ++y) {
    for (int ch = 0; ch < 3; ++ch) {
      total.sum_fg[ch] += rows[y].sum_fg[ch];
      total.sum_bg[ch] += rows[y].sum_bg[ch];
    }
    total.n_fg += rows[y].n_fg;
    total.n_bg += rows[y].n_bg;
  }
  return total;
}

double cv_energy_sum(const RasterImage& img, const ScalarGrid& phi, const Color& c1,
                     const Color& c2) {
  const int w = img.width();
  const int h = img.height();
  std::vector<double> rows(static_cast<std::size_t>(h), 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    double acc = 0.0;
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = row + x;
      acc += phi.values[i] >= 0.0 ? color_dist2(img, i, c1) : color_dist2(img, i, c2);
    }
    rows[y] = acc;
  }
  double total = 0.0;
  for (int y = 0; y < h; ++y) total += rows[y];
  return total;
}

double shape_mismatch_sum(const ScalarGrid& phi, const ScalarGrid& poi, const ScalarGrid& shape) {
  const int w = phi.width;
  const int h = phi.height;
  std::vector<double> rows(static_cast<std::size_t>(h), 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    double acc = 0.0;
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = row + x;
      const double m = (phi.values[i] >= 0.0 && poi.values[i] >= 0.0) ? 1.0 : 0.0;
      const double h_psi = shape.values[i] >= 0.0 ? 1.0 : 0.0;
      const double r = m - h_psi;
      acc += r * r;
    }
    rows[y] = acc;
  }
  double total = 0.0;
  for (int y = 0; y < h; ++y) total += rows[y];
  return total;
}

double shape_energy_smooth_sum(const ScalarGrid& fg_soft, const ScalarGrid& tmpl,
                               const WarpSpec& spec, double heaviside_eps, double lambda) {
  const int w = fg_soft.width;
  const int h = fg_soft.height;
  std::vector<double> rows(static_cast<std::size_t>(h), 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    double acc = 0.0;
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const Vec2 pull = affine_pullback(spec.params, x - spec.center.x, y - spec.center.y);
      const BilinearSample smp =
          sample_catmullrom(tmpl, spec.center.x + pull.x, spec.center.y + pull.y);
      const double wv = spec.params.s * smp.value;
      const double r = smooth_heaviside(fg_soft.values[row + x], heaviside_eps) -
                       smooth_heaviside(wv, heaviside_eps);
      acc += r * r;
    }
    rows[y] = acc;
  }
  double total = 0.0;
  for (int y = 0; y < h; ++y) total += rows[y];
  return lambda * total;
}

ShapeGradSums shape_gradient_sums(const ScalarGrid& fg_soft, const ScalarGrid& tmpl,
                                  const WarpSpec& spec, double heaviside_eps, double lambda) {
  const int w = fg_soft.width;
  const int h = fg_soft.height;
  const AffineParams& p = spec.params;
  const double c = std::cos(p.theta);
  const double n = std::sin(p.theta);
  const double A = c + p.sh_y * n;
  const double B = n + p.sh_x * c;
  const double D = -n + p.sh_y * c;
  const double E = c - p.sh_x * n;
  std::vector<ShapeGradSums> rows(static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    ShapeGradSums r;
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const double relx = x - spec.center.x;
      const double rely = y - spec.center.y;
      const Vec2 pull = affine_pullback(p, relx, rely);
      const BilinearSample smp =
          sample_catmullrom(tmpl, spec.center.x + pull.x, spec.center.y + pull.y);
      const double wv = p.s * smp.value;
      const double res = smooth_heaviside(fg_soft.values[row + x], heaviside_eps) -
                         smooth_heaviside(wv, heaviside_eps);
      if (std::abs(res) > 0.5) ++r.residual_px;
      const double common = -2.0 * lambda * res * smooth_delta(wv, heaviside_eps);
      if (common == 0.0) continue;
      const double tx = smp.dx;
      const double ty = smp.dy;
      const double px = relx - p.tr_x;
      const double qy = rely - p.tr_y;
      r.g[0] += common * (-(A * tx + D * ty));
      r.g[1] += common * (-(B * tx + E * ty));
      r.g[2] += common * (smp.value - (tx * pull.x + ty * pull.y));
      r.g[3] += common * (p.s * (tx * pull.y - ty * pull.x));
      r.g[4] += common * (qy * (c * tx - n * ty));
      r.g[5] += common * (px * (n * tx + c * ty));
    }
    rows[y] = r;
  }
  ShapeGradSums total;
  for (int y = 0; y < h; ++y) {
    for (int k = 0; k < 6; ++k) total.g[k] += rows[y].g[k];
    total.residual_px += rows[y].residual_px;
  }
  return total;
}

}  // namespace annofix::kernels
