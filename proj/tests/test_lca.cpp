#include <doctest.h>

#include <cmath>

#include "annofix/annot.hpp"
#include "annofix/chanvese.hpp"
#include "annofix/lca.hpp"
#include "annofix/rng.hpp"

using namespace annofix;

namespace {

RasterImage gray_image(int w, int h, double fill = 0.5) {
  RasterImage img;
  img.channels.emplace_back(w, h, fill);
  return img;
}

LevelSet signs(std::initializer_list<double> vs, int w, int h) {
  LevelSet ls(w, h);
  ls.values = vs;
  return ls;
}

BinaryMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryMask m(w, h, 0);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) m.at(x, y) = 1;
  }
  return m;
}

BinaryMask disc_mask(int w, int h, double cx, double cy, double r) {
  BinaryMask m(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.at(x, y) = 1;
    }
  }
  return m;
}

LevelSet mask_signs(const BinaryMask& m) {
  LevelSet ls(m.width, m.height);
  for (std::size_t i = 0; i < m.size(); ++i) ls.values[i] = m.bits[i] ? 1.0 : -1.0;
  return ls;
}

Vec2 center_of_mass(const BinaryMask& m) {
  double sx = 0.0, sy = 0.0;
  long n = 0;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (m.at(x, y)) {
        sx += x;
        sy += y;
        ++n;
      }
    }
  }
  return {sx / n, sy / n};
}

}  // namespace

TEST_CASE("lca energy hand cases") {
  SUBCASE("lambda = 0 equals the plain color energy") {
    Rng rng(2);
    RasterImage img = gray_image(7, 5);
    for (double& v : img.channels[0].values) v = rng.uniform();
    LevelSet phi(7, 5), poi(7, 5), psi(7, 5);
    for (double& v : phi.values) v = rng.uniform(-1.0, 1.0);
    for (double& v : poi.values) v = rng.uniform(-1.0, 1.0);
    for (double& v : psi.values) v = rng.uniform(-1.0, 1.0);
    const Color c1{0.3}, c2{0.7};
    CHECK(lca::energy(img, phi, poi, psi, c1, c2, 0.0) ==
          doctest::Approx(chanvese::energy(img, phi, c1, c2)));
  }
  SUBCASE("both terms zero") {
    const RasterImage img = gray_image(2, 2, 0.5);
    const LevelSet ones(2, 2, 1.0);
    CHECK(lca::energy(img, ones, ones, ones, {0.5}, {0.5}, 3.0) == doctest::Approx(0.0));
  }
  SUBCASE("one mismatched pixel times lambda") {
    const RasterImage img = gray_image(2, 1, 0.5);
    const LevelSet phi = signs({1.0, -1.0}, 2, 1);
    const LevelSet poi(2, 1, 1.0);
    const LevelSet psi(2, 1, -1.0);
    CHECK(lca::energy(img, phi, poi, psi, {0.5}, {0.5}, 3.0) == doctest::Approx(3.0));
  }
}

TEST_CASE("update_phi reduces to the plain sign step at lambda = 0") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    RasterImage img;
    for (int ch = 0; ch < 3; ++ch) {
      ScalarGrid g(9, 6);
      for (double& v : g.values) v = rng.uniform();
      img.channels.push_back(std::move(g));
    }
    LevelSet phi(9, 6), poi(9, 6), psi(9, 6);
    for (double& v : phi.values) v = rng.uniform(-1.0, 1.0);
    for (double& v : poi.values) v = rng.uniform(-1.0, 1.0);
    for (double& v : psi.values) v = rng.uniform(-1.0, 1.0);
    const Color c1{0.2, 0.5, 0.7}, c2{0.6, 0.4, 0.3};
    const LevelSet a = lca::update_phi(img, phi, poi, psi, c1, c2, 0.0);
    const LevelSet b = chanvese::step(img, c1, c2);
    CHECK(a.values == b.values);
  }
}

TEST_CASE("update_phi pinned sign analyses") {
  // One pixel; color residuals equal, so only the shape pressure acts.
  const RasterImage img = gray_image(1, 1, 0.5);
  const Color c{0.5};
  SUBCASE("outside the poi the color rule applies") {
    const LevelSet phi(1, 1, 1.0), poi(1, 1, -1.0), psi(1, 1, 1.0);
    // H(L)=0 gates the pressure off; equal residuals tie to foreground.
    CHECK(lca::update_phi(img, phi, poi, psi, c, c, 3.0).values[0] == 1.0);
  }
  SUBCASE("equal residuals, under poi and shape, currently foreground: stays") {
    const LevelSet phi(1, 1, 1.0), poi(1, 1, 1.0), psi(1, 1, 1.0);
    CHECK(lca::update_phi(img, phi, poi, psi, c, c, 3.0).values[0] == 1.0);
  }
  SUBCASE("under poi, foreground, no shape beneath: pressure expels") {
    const LevelSet phi(1, 1, 1.0), poi(1, 1, 1.0), psi(1, 1, -1.0);
    CHECK(lca::update_phi(img, phi, poi, psi, c, c, 3.0).values[0] == -1.0);
  }
}

TEST_CASE("update_poi pinned cases and the support restriction") {
  const int w = 3, h = 1;
  const BinaryMask support = rect_mask(w, h, 0, 0, 1, 0);  // pixel 2 outside
  SUBCASE("H(phi)=0 gives condition 0 >= 0, so L becomes positive inside support") {
    const LevelSet phi(w, h, -1.0), poi(w, h, -1.0), psi(w, h, 1.0);
    const LevelSet out = lca::update_poi(phi, poi, psi, support);
    CHECK(out.values[0] == 1.0);
    CHECK(out.values[1] == 1.0);
    CHECK(out.values[2] == -1.0);
  }
  SUBCASE("foreground under poi and shape stays") {
    const LevelSet phi(w, h, 1.0), poi(w, h, 1.0), psi(w, h, 1.0);
    const LevelSet out = lca::update_poi(phi, poi, psi, support);
    CHECK(out.values[0] == 1.0);
  }
  SUBCASE("outside the initial support L never becomes positive") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      LevelSet phi(w, h), poi(w, h), psi(w, h);
      for (double& v : phi.values) v = rng.uniform(-1.0, 1.0);
      for (double& v : poi.values) v = rng.uniform(-1.0, 1.0);
      for (double& v : psi.values) v = rng.uniform(-1.0, 1.0);
      CHECK(lca::update_poi(phi, poi, psi, support).values[2] == -1.0);
    }
  }
}

TEST_CASE("warp_shape: identity reproduces the template on the lattice") {
  const BinaryMask mask = disc_mask(48, 48, 20, 20, 8);
  const lca::ShapePrior prior = lca::make_shape_prior(mask, 1.5);
  const LevelSet warped = lca::warp_shape(prior.tmpl, AffineParams::identity(), prior.center);
  for (std::size_t i = 0; i < warped.size(); ++i) {
    CHECK(std::abs(warped.values[i] - prior.tmpl.values[i]) <= 1e-6);
  }
}

TEST_CASE("warp_shape: +5 px translation moves the disc center") {
  const BinaryMask mask = disc_mask(64, 64, 20, 20, 8);
  const lca::ShapePrior prior = lca::make_shape_prior(mask, 1.5);
  AffineParams p;
  p.tr_x = 5.0;
  const BinaryMask warped = heaviside(lca::warp_shape(prior.tmpl, p, prior.center));
  const Vec2 com = center_of_mass(warped);
  CHECK(std::abs(com.x - 25.0) <= 0.5);
  CHECK(std::abs(com.y - 20.0) <= 0.5);
}

TEST_CASE("warp_shape: quarter rotation preserves disc area within 2%") {
  const BinaryMask mask = disc_mask(64, 64, 32, 32, 10);
  const lca::ShapePrior prior = lca::make_shape_prior(mask, 1.5);
  AffineParams p;
  p.theta = 3.14159265358979323846 / 2.0;
  const BinaryMask warped = heaviside(lca::warp_shape(prior.tmpl, p, prior.center));
  const long base = heaviside(prior.tmpl).count();
  CHECK(std::abs(static_cast<double>(warped.count()) - base) <= 0.02 * base);
}

TEST_CASE("affine gradients vanish exactly when the masks agree with margin") {
  // Sharply blurred prior: every pixel clears the smoothing band, so the
  // agreeing configuration is exactly flat.
  const BinaryMask mask = rect_mask(40, 40, 12, 14, 27, 25);
  const lca::ShapePrior prior = lca::make_shape_prior(mask, 0.2);
  const LevelSet warped = lca::warp_shape(prior.tmpl, AffineParams::identity(), prior.center);
  const LevelSet phi = mask_signs(heaviside(warped));
  const LevelSet poi(40, 40, 1.0);
  const lca::AffineGradients g =
      lca::affine_gradients(phi, poi, prior, AffineParams::identity(), 3.0);
  for (int i = 0; i < 6; ++i) CHECK(g.g[i] == 0.0);
}

TEST_CASE("affine gradients agree with central finite differences") {
  // 50 random smooth configurations; relative error <= 1e-3 per parameter.
  Rng rng(42);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 72, h = 60;
    BinaryMask shape(w, h, 0);
    const int blobs = rng.uniform_int(1, 3);
    for (int b = 0; b < blobs; ++b) {
      const BinaryMask d = disc_mask(w, h, rng.uniform(22.0, 50.0), rng.uniform(20.0, 40.0),
                                     rng.uniform(5.0, 9.0));
      for (std::size_t i = 0; i < d.size(); ++i) shape.bits[i] |= d.bits[i];
    }
    const lca::ShapePrior prior = lca::make_shape_prior(shape, 2.0);

    BinaryMask fg(w, h, 0);
    const int fg_blobs = rng.uniform_int(1, 3);
    for (int b = 0; b < fg_blobs; ++b) {
      const BinaryMask d = disc_mask(w, h, rng.uniform(22.0, 50.0), rng.uniform(20.0, 40.0),
                                     rng.uniform(5.0, 9.0));
      for (std::size_t i = 0; i < d.size(); ++i) fg.bits[i] |= d.bits[i];
    }
    const LevelSet phi = mask_signs(fg);
    const LevelSet poi(w, h, 1.0);

    AffineParams p;
    p.tr_x = rng.uniform(-4.0, 4.0);
    p.tr_y = rng.uniform(-4.0, 4.0);
    p.s = 1.0 + rng.uniform(-0.12, 0.12);
    p.theta = rng.uniform(-0.25, 0.25);
    p.sh_x = rng.uniform(-0.1, 0.1);
    p.sh_y = rng.uniform(-0.1, 0.1);

    const double lambda = 3.0;
    const lca::AffineGradients g = lca::affine_gradients(phi, poi, prior, p, lambda);

    const double h_fd = 1e-3;
    for (int k = 0; k < 6; ++k) {
      AffineParams lo = p;
      AffineParams hi = p;
      double* fields_lo[6] = {&lo.tr_x, &lo.tr_y, &lo.s, &lo.theta, &lo.sh_x, &lo.sh_y};
      double* fields_hi[6] = {&hi.tr_x, &hi.tr_y, &hi.s, &hi.theta, &hi.sh_x, &hi.sh_y};
      *fields_lo[k] -= h_fd;
      *fields_hi[k] += h_fd;
      const double e_lo = lca::shape_energy_smooth(phi, poi, prior, lo, lambda);
      const double e_hi = lca::shape_energy_smooth(phi, poi, prior, hi, lambda);
      const double fd = (e_hi - e_lo) / (2.0 * h_fd);
      if (std::abs(fd) < 1e-7 && std::abs(g.g[k]) < 1e-7) continue;  // jointly negligible
      CAPTURE(trial);
      CAPTURE(k);
      const double rel = std::abs(g.g[k] - fd) / std::max(std::abs(fd), std::abs(g.g[k]));
      CHECK(rel <= 1e-3);
      ++checked;
    }
  }
  CHECK(checked > 200);  // the tolerance must have been exercised broadly
}

TEST_CASE("translation gradient points toward one-sided mismatch") {
  // Foreground sits 6 px to the +x side of the prior: moving +x must lower
  // the smoothed energy, so the tr_x gradient is negative.
  const int w = 64, h = 48;
  const BinaryMask shape = rect_mask(w, h, 20, 20, 30, 27);
  const BinaryMask fg = rect_mask(w, h, 26, 20, 36, 27);
  const lca::ShapePrior prior = lca::make_shape_prior(shape, 1.5);
  const LevelSet phi = mask_signs(fg);
  const LevelSet poi(w, h, 1.0);
  const lca::AffineGradients g =
      lca::affine_gradients(phi, poi, prior, AffineParams::identity(), 3.0);
  CHECK(g.g[0] < 0.0);
  // And the finite-difference energy agrees that +x is downhill.
  AffineParams plus;
  plus.tr_x = 0.5;
  CHECK(lca::shape_energy_smooth(phi, poi, prior, plus, 3.0) <
        lca::shape_energy_smooth(phi, poi, prior, AffineParams::identity(), 3.0));
}

TEST_CASE("update_shape: zero gradients leave the parameters fixed") {
  const BinaryMask mask = rect_mask(40, 40, 12, 14, 27, 25);
  const lca::ShapePrior prior = lca::make_shape_prior(mask, 0.2);
  const LevelSet warped = lca::warp_shape(prior.tmpl, AffineParams::identity(), prior.center);
  const LevelSet phi = mask_signs(heaviside(warped));
  const LevelSet poi(40, 40, 1.0);
  lca::LcaOptions opts;
  const lca::ShapeUpdate su =
      lca::update_shape(phi, poi, prior, AffineParams::identity(), 3.0, opts);
  CHECK(su.params.tr_x == 0.0);
  CHECK(su.params.tr_y == 0.0);
  CHECK(su.params.s == 1.0);
  CHECK(su.params.theta == 0.0);
  // The re-threshold keeps the aligned shape.
  CHECK(heaviside(su.shape).bits == heaviside(warped).bits);
}

TEST_CASE("update_shape: lambda = 0 never moves the parameters") {
  const BinaryMask shape = rect_mask(48, 48, 10, 10, 20, 18);
  const BinaryMask fg = rect_mask(48, 48, 20, 22, 34, 30);
  const lca::ShapePrior prior = lca::make_shape_prior(shape, 1.5);
  lca::LcaOptions opts;
  lca::ShapeUpdate su = lca::update_shape(mask_signs(fg), LevelSet(48, 48, 1.0), prior,
                                          AffineParams::identity(), 0.0, opts);
  CHECK(su.params.tr_x == 0.0);
  CHECK(su.params.tr_y == 0.0);
  CHECK(su.params.s == 1.0);
}

TEST_CASE("update_shape recovers a pure 4-px translation within 100 iterations") {
  const int w = 96, h = 64;
  const BinaryMask shape = rect_mask(w, h, 24, 28, 64, 34);
  const BinaryMask fg = rect_mask(w, h, 28, 28, 68, 34);  // shifted +4 in x
  const lca::ShapePrior prior = lca::make_shape_prior(shape, 1.5);
  const LevelSet phi = mask_signs(fg);
  const LevelSet poi(w, h, 1.0);
  lca::LcaOptions opts;
  AffineParams p;
  for (int it = 0; it < 100; ++it) {
    p = lca::update_shape(phi, poi, prior, p, 1.0, opts).params;
  }
  CAPTURE(p.tr_x);
  CAPTURE(p.tr_y);
  CHECK(std::abs(p.tr_x - 4.0) <= 1.0);
  CHECK(std::abs(p.tr_y) <= 1.0);
  CHECK(std::abs(p.s - 1.0) <= 0.05);
}
