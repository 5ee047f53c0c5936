#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "annofix/annot.hpp"
#include "annofix/metrics.hpp"
#include "annofix/rng.hpp"
#include "annofix/vectorize.hpp"

using namespace annofix;
namespace vz = annofix::vectorize;

namespace {

int count_kind(const std::vector<vz::Node>& nodes, vz::NodeKind kind) {
  int n = 0;
  for (const vz::Node& node : nodes) n += node.kind == kind ? 1 : 0;
  return n;
}

/// Random polyline whose consecutive segments turn by at least 20 degrees.
Polyline random_test_polyline(Rng& rng, int canvas) {
  Polyline line;
  line.id = "src";
  const double margin = 30.0;
  Point cur{rng.uniform(margin, canvas - margin), rng.uniform(margin, canvas - margin)};
  double heading = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  line.points.push_back(cur);
  const int segments = rng.uniform_int(2, 3);
  for (int i = 0; i < segments; ++i) {
    for (int attempt = 0; attempt < 40; ++attempt) {
      const double len = rng.uniform(0.25, 0.45) * canvas;
      const Point next{cur.x + len * std::cos(heading), cur.y + len * std::sin(heading)};
      if (next.x > margin && next.x < canvas - margin && next.y > margin &&
          next.y < canvas - margin) {
        line.points.push_back(next);
        cur = next;
        break;
      }
      heading += 0.9;
    }
    const double turn = rng.uniform(0.35, 0.9);  // 20..52 degrees
    heading += rng.uniform() < 0.5 ? turn : -turn;
  }
  return line;
}

}  // namespace

TEST_CASE("empty mask skeletonizes to an empty mask") {
  const BinaryMask empty(16, 16, 0);
  CHECK(vz::skeletonize(empty).count() == 0);
}

TEST_CASE("a solid band thins to a 1-px path inside the band") {
  BinaryMask band(13, 7, 0);
  for (int y = 2; y <= 4; ++y) {
    for (int x = 2; x <= 10; ++x) band.at(x, y) = 1;
  }
  const BinaryMask skel = vz::skeletonize(band);
  CHECK(skel.count() >= 6);
  CHECK(skel.count() <= 11);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 13; ++x) {
      if (skel.at(x, y)) {
        CHECK(band.at(x, y) == 1);        // containment
        CHECK(skel.at(x, (y + 2) % 7) == 0);  // width 1: no vertical stack of 3
      }
    }
  }
}

TEST_CASE("skeletonize is idempotent") {
  Rng rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const Polyline line = random_test_polyline(rng, 96);
    const BinaryMask mask = annot::buffer_rasterize({line}, 3.0, 96, 96);
    const BinaryMask once = vz::skeletonize(mask);
    const BinaryMask twice = vz::skeletonize(once);
    CHECK(once.bits == twice.bits);
  }
}

TEST_CASE("skeletonization preserves 8-connected component count") {
  std::vector<Polyline> lines;
  lines.push_back({"a", {{10, 10}, {40, 12}}});
  lines.push_back({"b", {{10, 40}, {44, 44}}});
  const BinaryMask mask = annot::buffer_rasterize(lines, 2.0, 56, 56);
  const BinaryMask skel = vz::skeletonize(mask);
  auto components = [](const BinaryMask& m) {
    std::vector<int> label(m.size(), -1);
    int n = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < m.height; ++y) {
      for (int x = 0; x < m.width; ++x) {
        if (!m.at(x, y) || label[y * m.width + x] >= 0) continue;
        label[y * m.width + x] = n;
        stack.push_back({x, y});
        while (!stack.empty()) {
          auto [cx, cy] = stack.back();
          stack.pop_back();
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int nx = cx + dx, ny = cy + dy;
              if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
              if (m.at(nx, ny) && label[ny * m.width + nx] < 0) {
                label[ny * m.width + nx] = n;
                stack.push_back({nx, ny});
              }
            }
          }
        }
        ++n;
      }
    }
    return n;
  };
  CHECK(components(mask) == 2);
  CHECK(components(skel) == 2);
}

TEST_CASE("straight 1-px line: exactly 2 end nodes") {
  BinaryMask line(60, 9, 0);
  for (int x = 5; x <= 54; ++x) line.at(x, 4) = 1;
  const auto nodes = vz::extract_nodes(line);
  CHECK(count_kind(nodes, vz::NodeKind::end) == 2);
  CHECK(count_kind(nodes, vz::NodeKind::junction) == 0);
  CHECK(count_kind(nodes, vz::NodeKind::turning) == 0);
}

TEST_CASE("L-shaped path: 2 ends and 1 turning node near the corner") {
  BinaryMask path(40, 40, 0);
  for (int x = 5; x <= 25; ++x) path.at(x, 20) = 1;
  for (int y = 20; y <= 35; ++y) path.at(25, y) = 1;
  const auto nodes = vz::extract_nodes(path);
  CHECK(count_kind(nodes, vz::NodeKind::end) == 2);
  CHECK(count_kind(nodes, vz::NodeKind::junction) == 0);
  REQUIRE(count_kind(nodes, vz::NodeKind::turning) == 1);
  for (const vz::Node& n : nodes) {
    if (n.kind == vz::NodeKind::turning) {
      CHECK(std::abs(n.x - 25.0) <= 2.0);
      CHECK(std::abs(n.y - 20.0) <= 2.0);
    }
  }
}

TEST_CASE("T-shaped skeleton: 3 ends and 1 junction") {
  BinaryMask path(40, 40, 0);
  for (int x = 5; x <= 30; ++x) path.at(x, 10) = 1;
  for (int y = 10; y <= 30; ++y) path.at(18, y) = 1;
  const auto nodes = vz::extract_nodes(path);
  CHECK(count_kind(nodes, vz::NodeKind::end) == 3);
  CHECK(count_kind(nodes, vz::NodeKind::junction) == 1);
}

TEST_CASE("straight 50-px line links into one edge of length 49") {
  BinaryMask line(60, 9, 0);
  for (int x = 5; x <= 54; ++x) line.at(x, 4) = 1;
  const auto graph = vz::link_edges(line, vz::extract_nodes(line));
  REQUIRE(graph.edges.size() == 1);
  CHECK(graph.edges[0].length == doctest::Approx(49.0).epsilon(0.0002));
  CHECK(graph.edges[0].geometry.points.size() == 50);
}

TEST_CASE("L-shape links into 2 edges meeting at the turning node") {
  BinaryMask path(40, 40, 0);
  for (int x = 5; x <= 25; ++x) path.at(x, 20) = 1;
  for (int y = 20; y <= 35; ++y) path.at(25, y) = 1;
  const auto nodes = vz::extract_nodes(path);
  const auto graph = vz::link_edges(path, nodes);
  CHECK(graph.edges.size() == 2);
}

TEST_CASE("empty skeleton links into an empty graph") {
  const BinaryMask empty(10, 10, 0);
  const auto graph = vz::link_edges(empty, {});
  CHECK(graph.empty());
}

TEST_CASE("a node-free ring gets a synthetic node and a self-loop edge") {
  BinaryMask ring(36, 36, 0);
  for (int deg = 0; deg < 1440; ++deg) {
    const double a = deg * 3.14159265358979323846 / 720.0;
    ring.at(18 + static_cast<int>(std::lround(10 * std::cos(a))),
            18 + static_cast<int>(std::lround(10 * std::sin(a)))) = 1;
  }
  const BinaryMask skel = vz::skeletonize(ring);
  const auto nodes = vz::extract_nodes(skel);
  if (nodes.empty()) {
    const auto graph = vz::link_edges(skel, nodes);
    REQUIRE(graph.edges.size() == 1);
    CHECK(graph.edges[0].node_a == graph.edges[0].node_b);
    CHECK(graph.nodes.size() == 1);
    CHECK(graph.edges[0].length > 0.0);
  } else {
    // A gentle circle should produce no nodes at all; if the rasterization
    // left corners, linking must still consume every pixel.
    const auto graph = vz::link_edges(skel, nodes);
    CHECK_FALSE(graph.edges.empty());
  }
}

TEST_CASE("edge bookkeeping invariants on random shapes") {
  Rng rng(13);
  for (int trial = 0; trial < 4; ++trial) {
    const Polyline line = random_test_polyline(rng, 128);
    const BinaryMask mask = annot::buffer_rasterize({line}, 3.0, 128, 128);
    const BinaryMask skel = vz::skeletonize(mask);
    const auto graph = vz::link_edges(skel, vz::extract_nodes(skel));
    double total = 0.0;
    for (const auto& e : graph.edges) {
      CHECK(e.length > 0.0);
      CHECK(e.length == doctest::Approx(polyline_length(e.geometry)).epsilon(1e-9));
      total += e.length;
    }
    CHECK(total <= skel.count() * std::sqrt(2.0));

    std::vector<int> degree(graph.nodes.size(), 0);
    for (const auto& e : graph.edges) {
      ++degree[e.node_a];
      ++degree[e.node_b];
    }
    for (const auto& n : graph.nodes) {
      if (n.kind == vz::NodeKind::end) CHECK(degree[n.id] == 1);
      if (n.kind == vz::NodeKind::junction) CHECK(degree[n.id] >= 3);
    }
  }
}

TEST_CASE("round trip: rasterize, skeletonize, link recovers length and layout") {
  Rng rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    const Polyline src = random_test_polyline(rng, 256);
    const double src_len = polyline_length(src);
    const BinaryMask mask = annot::buffer_rasterize({src}, 3.0, 256, 256);
    const vz::LineGraph recovered = vz::mask_to_graph(mask);
    const double got_len = recovered.total_length();
    CAPTURE(trial);
    CAPTURE(src_len);
    CAPTURE(got_len);
    CHECK(std::abs(got_len - src_len) <= 0.05 * src_len);

    const vz::LineGraph truth = vz::graph_from_polylines({src});
    const metrics::LineScore score = metrics::correctness_completeness(recovered, truth, 3.0);
    CHECK(score.correctness >= 0.98);
    CHECK(score.completeness >= 0.98);
  }
}
