#include <doctest.h>

#include "annofix/annot.hpp"
#include "annofix/rng.hpp"

using namespace annofix;

namespace {

/// Independent oracle: exhaustive distance thresholding over every pixel and
/// every segment, no culling.
BinaryMask brute_force_buffer(const std::vector<Polyline>& lines, double radius, int w, int h) {
  BinaryMask mask(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Point p{static_cast<double>(x), static_cast<double>(y)};
      bool inside = false;
      for (const Polyline& line : lines) {
        for (std::size_t i = 1; i + 0 < line.points.size() && !inside; ++i) {
          if (point_segment_dist2(p, line.points[i - 1], line.points[i]) <= radius * radius) {
            inside = true;
          }
        }
        if (inside) break;
      }
      mask.at(x, y) = inside ? 1 : 0;
    }
  }
  return mask;
}

Polyline make_line(std::initializer_list<Point> pts, const std::string& id = "t") {
  Polyline line;
  line.id = id;
  line.points = pts;
  return line;
}

Polyline random_line(Rng& rng, int w, int h) {
  Polyline line;
  line.id = "r";
  const int n = rng.uniform_int(2, 5);
  for (int i = 0; i < n; ++i) {
    line.points.push_back({rng.uniform(2.0, w - 3.0), rng.uniform(2.0, h - 3.0)});
  }
  return line;
}

}  // namespace

TEST_CASE("zero-radius raster hits exactly the pixels under the segment") {
  const auto lines = std::vector<Polyline>{make_line({{2, 5}, {9, 5}})};
  const BinaryMask mask = annot::buffer_rasterize(lines, 0.0, 12, 12);
  CHECK(mask.count() == 8);
  for (int x = 2; x <= 9; ++x) CHECK(mask.at(x, 5) == 1);
}

TEST_CASE("radius-2 raster equals the brute-force distance oracle") {
  const auto lines = std::vector<Polyline>{make_line({{2, 5}, {9, 5}})};
  const BinaryMask mask = annot::buffer_rasterize(lines, 2.0, 12, 12);
  const BinaryMask oracle = brute_force_buffer(lines, 2.0, 12, 12);
  CHECK(mask.bits == oracle.bits);
}

TEST_CASE("buffer equals brute force on random small canvases") {
  Rng rng(17);
  for (int trial = 0; trial < 12; ++trial) {
    const int w = rng.uniform_int(16, 64);
    const int h = rng.uniform_int(16, 64);
    std::vector<Polyline> lines;
    const int n = rng.uniform_int(1, 3);
    for (int i = 0; i < n; ++i) lines.push_back(random_line(rng, w, h));
    const double radius = rng.uniform(0.0, 6.0);
    CAPTURE(trial);
    const BinaryMask mask = annot::buffer_rasterize(lines, radius, w, h);
    const BinaryMask oracle = brute_force_buffer(lines, radius, w, h);
    CHECK(mask.bits == oracle.bits);
  }
}

TEST_CASE("radius monotonicity") {
  Rng rng(23);
  for (int trial = 0; trial < 8; ++trial) {
    const auto lines = std::vector<Polyline>{random_line(rng, 48, 48)};
    const double r1 = rng.uniform(0.0, 4.0);
    const double r2 = r1 + rng.uniform(0.0, 5.0);
    const BinaryMask small = annot::buffer_rasterize(lines, r1, 48, 48);
    const BinaryMask big = annot::buffer_rasterize(lines, r2, 48, 48);
    for (std::size_t i = 0; i < small.size(); ++i) {
      if (small.bits[i]) CHECK(big.bits[i] == 1);
    }
  }
}

TEST_CASE("empty line list rasterizes to an all-zero mask") {
  CHECK(annot::buffer_rasterize({}, 4.0, 10, 10).count() == 0);
}

TEST_CASE("poi buffer contains the annotation buffer") {
  Rng rng(31);
  const auto lines = std::vector<Polyline>{random_line(rng, 100, 100)};
  const BinaryMask poi = annot::make_poi(lines, 30.0, 100, 100);
  const BinaryMask ann = annot::buffer_rasterize(lines, 5.0, 100, 100);
  for (std::size_t i = 0; i < poi.size(); ++i) {
    if (ann.bits[i]) CHECK(poi.bits[i] == 1);
  }
}

TEST_CASE("unit segment buffers into a disc-like blob") {
  const auto lines = std::vector<Polyline>{make_line({{40, 40}, {40.5, 40}})};
  const BinaryMask mask = annot::make_poi(lines, 30.0, 80, 80);
  const BinaryMask oracle = brute_force_buffer(lines, 30.0, 80, 80);
  CHECK(mask.bits == oracle.bits);
  // Disc of r=30 has ~2830 px; the half-pixel stem adds a sliver.
  CHECK(mask.count() > 2700);
  CHECK(mask.count() < 2950);
}

TEST_CASE("one short line inside one window yields exactly one tile") {
  const auto lines = std::vector<Polyline>{make_line({{50, 50}, {70, 60}})};
  const auto tiles = annot::tile_windows(lines, 512, 512, 128, 32);
  REQUIRE(tiles.size() == 1);
  CHECK(tiles[0].width == 128);
  CHECK(tiles[0].height == 128);
  CHECK(tiles[0].source_polyline_ids == std::vector<std::string>{"t"});
}

TEST_CASE("tiling covers the buffered extent of a long line") {
  const auto lines = std::vector<Polyline>{make_line({{40, 200}, {340, 210}})};
  const auto tiles = annot::tile_windows(lines, 512, 512, 128, 32);
  CHECK(tiles.size() > 1);
  const BinaryMask poi = annot::make_poi(lines, 30.0, 512, 512);
  // Coverage oracle: every poi pixel lies in at least one window.
  BinaryMask covered(512, 512, 0);
  for (const annot::TileWindow& t : tiles) {
    for (int y = t.y0; y < t.y0 + t.height; ++y) {
      for (int x = t.x0; x < t.x0 + t.width; ++x) covered.at(x, y) = 1;
    }
  }
  for (std::size_t i = 0; i < poi.size(); ++i) {
    if (poi.bits[i]) CHECK(covered.bits[i] == 1);
  }
  // Adjacent windows share at least the requested overlap.
  for (std::size_t i = 1; i < tiles.size(); ++i) {
    if (tiles[i].y0 == tiles[i - 1].y0 && tiles[i].x0 > tiles[i - 1].x0) {
      CHECK(tiles[i - 1].x0 + tiles[i - 1].width - tiles[i].x0 >= 32);
    }
  }
}

TEST_CASE("empty line list yields no tiles") {
  CHECK(annot::tile_windows({}, 256, 256).empty());
}
