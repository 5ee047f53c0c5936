#include <doctest.h>
#include <omp.h>

#include "annofix/kernels.hpp"
#include "annofix/rng.hpp"

// The OpenMP kernels and their serial reference twins must agree bit for bit,
// for any thread count.

using namespace annofix;
namespace k = annofix::kernels;

namespace {

struct Fixture {
  RasterImage img;
  ScalarGrid phi, poi, shape;
  BinaryMask support;
  ScalarGrid fg_soft;
  ScalarGrid tmpl;
  k::WarpSpec warp;

  explicit Fixture(std::uint64_t seed, int w = 57, int h = 43) {
    Rng rng(seed);
    for (int ch = 0; ch < 3; ++ch) {
      ScalarGrid g(w, h);
      for (double& v : g.values) v = rng.uniform();
      img.channels.push_back(std::move(g));
    }
    phi = ScalarGrid(w, h);
    poi = ScalarGrid(w, h);
    shape = ScalarGrid(w, h);
    for (double& v : phi.values) v = rng.uniform(-1.0, 1.0);
    for (double& v : poi.values) v = rng.uniform(-1.0, 1.0);
    for (double& v : shape.values) v = rng.uniform(-1.0, 1.0);
    support = BinaryMask(w, h);
    for (auto& b : support.bits) b = rng.uniform() < 0.7 ? 1 : 0;
    fg_soft = ScalarGrid(w, h);
    for (double& v : fg_soft.values) v = rng.uniform(-0.5, 0.5);
    tmpl = ScalarGrid(w, h, -0.5);
    for (int y = h / 4; y < 3 * h / 4; ++y) {
      for (int x = w / 4; x < 3 * w / 4; ++x) tmpl.at(x, y) = rng.uniform(-0.4, 0.5);
    }
    warp.params = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0), 1.0 + rng.uniform(-0.1, 0.1),
                   rng.uniform(-0.2, 0.2), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)};
    warp.center = {w / 2.0, h / 2.0};
    warp.border = k::Border::clamp;
  }
};

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  const Color c1{0.2, 0.3, 0.4};
  const Color c2{0.8, 0.7, 0.6};
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Fixture f(seed);
    for (int threads : {1, 2, 3}) {
      omp_set_num_threads(threads);
      CAPTURE(seed);
      CAPTURE(threads);

      ScalarGrid a, b;
      k::cv_sign_update(f.img, c1, c2, a);
      k::ref::cv_sign_update(f.img, c1, c2, b);
      CHECK(bits_equal(a.values, b.values));

      k::lca_sign_update(f.img, f.phi, f.poi, f.shape, c1, c2, 0.17, a);
      k::ref::lca_sign_update(f.img, f.phi, f.poi, f.shape, c1, c2, 0.17, b);
      CHECK(bits_equal(a.values, b.values));

      k::poi_sign_update(f.phi, f.poi, f.shape, f.support, a);
      k::ref::poi_sign_update(f.phi, f.poi, f.shape, f.support, b);
      CHECK(bits_equal(a.values, b.values));

      k::shape_sign_update(f.phi, f.poi, f.shape, f.support, a);
      k::ref::shape_sign_update(f.phi, f.poi, f.shape, f.support, b);
      CHECK(bits_equal(a.values, b.values));

      a = ScalarGrid(f.tmpl.width, f.tmpl.height);
      b = ScalarGrid(f.tmpl.width, f.tmpl.height);
      k::warp_bilinear(f.tmpl, f.warp, a);
      k::ref::warp_bilinear(f.tmpl, f.warp, b);
      CHECK(bits_equal(a.values, b.values));

      k::gaussian_blur(f.tmpl, 1.5, a);
      k::ref::gaussian_blur(f.tmpl, 1.5, b);
      CHECK(bits_equal(a.values, b.values));

      const k::RegionSums ra = k::region_sums(f.img, f.phi);
      const k::RegionSums rb = k::ref::region_sums(f.img, f.phi);
      CHECK(ra.n_fg == rb.n_fg);
      CHECK(ra.n_bg == rb.n_bg);
      for (int ch = 0; ch < 3; ++ch) {
        CHECK(ra.sum_fg[ch] == rb.sum_fg[ch]);
        CHECK(ra.sum_bg[ch] == rb.sum_bg[ch]);
      }

      CHECK(k::cv_energy_sum(f.img, f.phi, c1, c2) == k::ref::cv_energy_sum(f.img, f.phi, c1, c2));
      CHECK(k::shape_mismatch_sum(f.phi, f.poi, f.shape) ==
            k::ref::shape_mismatch_sum(f.phi, f.poi, f.shape));
      CHECK(k::shape_energy_smooth_sum(f.fg_soft, f.tmpl, f.warp, 0.1, 0.3) ==
            k::ref::shape_energy_smooth_sum(f.fg_soft, f.tmpl, f.warp, 0.1, 0.3));

      const k::ShapeGradSums ga = k::shape_gradient_sums(f.fg_soft, f.tmpl, f.warp, 0.1, 0.3);
      const k::ShapeGradSums gb = k::ref::shape_gradient_sums(f.fg_soft, f.tmpl, f.warp, 0.1, 0.3);
      CHECK(ga.residual_px == gb.residual_px);
      for (int i = 0; i < 6; ++i) CHECK(ga.g[i] == gb.g[i]);
    }
  }
  omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("reductions do not depend on the thread count") {
  Fixture f(9);
  const Color c1{0.4, 0.4, 0.4};
  const Color c2{0.6, 0.6, 0.6};
  omp_set_num_threads(1);
  const double e1 = k::cv_energy_sum(f.img, f.phi, c1, c2);
  const k::ShapeGradSums g1 = k::shape_gradient_sums(f.fg_soft, f.tmpl, f.warp, 0.1, 1.0);
  omp_set_num_threads(3);
  const double e3 = k::cv_energy_sum(f.img, f.phi, c1, c2);
  const k::ShapeGradSums g3 = k::shape_gradient_sums(f.fg_soft, f.tmpl, f.warp, 0.1, 1.0);
  CHECK(e1 == e3);
  for (int i = 0; i < 6; ++i) CHECK(g1.g[i] == g3.g[i]);
  omp_set_num_threads(omp_get_num_procs());
}
