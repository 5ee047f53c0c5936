#include "annofix/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace annofix::vectorize {

namespace {

// 8-neighborhood in Zhang-Suen order P2..P9: N, NE, E, SE, S, SW, W, NW.
constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
// Tracing prefers 4-neighbors; stepping onto a diagonal shortcut would
// orphan the corner pixel it skips.
constexpr int kTraceOrder[8] = {0, 2, 4, 6, 1, 3, 5, 7};

struct Grid8 {
  const BinaryMask& m;
  bool at(int x, int y) const {
    if (x < 0 || y < 0 || x >= m.width || y >= m.height) return false;
    return m.at(x, y) != 0;
  }
  int degree(int x, int y) const {
    int d = 0;
    for (int k = 0; k < 8; ++k) d += at(x + kDx[k], y + kDy[k]) ? 1 : 0;
    return d;
  }
};

void drop_small_components(BinaryMask& mask, int min_px) {
  if (min_px <= 1) return;
  const int w = mask.width;
  const int h = mask.height;
  std::vector<int> label(mask.size(), -1);
  std::vector<std::size_t> stack;
  int next = 0;
  std::vector<long> sizes;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!mask.bits[i] || label[i] >= 0) continue;
      stack.push_back(i);
      label[i] = next;
      long size = 0;
      while (!stack.empty()) {
        const std::size_t j = stack.back();
        stack.pop_back();
        ++size;
        const int jx = static_cast<int>(j % w);
        const int jy = static_cast<int>(j / w);
        for (int k = 0; k < 8; ++k) {
          const int nx = jx + kDx[k];
          const int ny = jy + kDy[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
          if (mask.bits[ni] && label[ni] < 0) {
            label[ni] = next;
            stack.push_back(ni);
          }
        }
      }
      sizes.push_back(size);
      ++next;
    }
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.bits[i] && sizes[label[i]] < min_px) mask.bits[i] = 0;
  }
}

/// Degrees, branch counts, and 8-connected clusters of branch pixels; each
/// cluster acts as a single junction node. The branch count is the crossing
/// number (0-to-1 transitions around the pixel), which tells a true fork
/// apart from the extra adjacency of a sharp corner.
struct SkeletonTopology {
  int w = 0;
  int h = 0;
  std::vector<int> degree;    // -1 for background
  std::vector<int> branches;  // crossing number, -1 for background
  std::vector<int> cluster;   // junction-cluster id per pixel, -1 otherwise
  std::vector<std::pair<int, int>> cluster_rep;  // (y, x) topmost-leftmost member

  bool on(int x, int y) const {
    return x >= 0 && y >= 0 && x < w && y < h && degree[static_cast<std::size_t>(y) * w + x] >= 0;
  }
  int deg(int x, int y) const { return degree[static_cast<std::size_t>(y) * w + x]; }
  int branch(int x, int y) const { return branches[static_cast<std::size_t>(y) * w + x]; }
  bool is_end(int x, int y) const { return deg(x, y) == 1; }
  bool is_junction(int x, int y) const { return branch(x, y) >= 3; }
  bool is_anchor(int x, int y) const { return is_end(x, y) || is_junction(x, y) || deg(x, y) == 0; }
  int cluster_at(int x, int y) const { return cluster[static_cast<std::size_t>(y) * w + x]; }
};

SkeletonTopology analyze(const BinaryMask& skel) {
  SkeletonTopology t;
  t.w = skel.width;
  t.h = skel.height;
  t.degree.assign(skel.size(), -1);
  t.branches.assign(skel.size(), -1);
  t.cluster.assign(skel.size(), -1);
  const Grid8 g{skel};
  for (int y = 0; y < t.h; ++y) {
    for (int x = 0; x < t.w; ++x) {
      if (!skel.at(x, y)) continue;
      const std::size_t i = static_cast<std::size_t>(y) * t.w + x;
      t.degree[i] = g.degree(x, y);
      int p[8];
      for (int k = 0; k < 8; ++k) p[k] = g.at(x + kDx[k], y + kDy[k]) ? 1 : 0;
      int a = 0;
      for (int k = 0; k < 8; ++k) a += (p[k] == 0 && p[(k + 1) % 8] == 1) ? 1 : 0;
      t.branches[i] = a;
    }
  }
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < t.h; ++y) {
    for (int x = 0; x < t.w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * t.w + x;
      if (t.branches[i] < 3 || t.cluster[i] >= 0) continue;
      t.cluster[i] = next;
      t.cluster_rep.push_back({y, x});
      stack.push_back({x, y});
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int k = 0; k < 8; ++k) {
          const int nx = cx + kDx[k];
          const int ny = cy + kDy[k];
          if (!t.on(nx, ny)) continue;
          const std::size_t ni = static_cast<std::size_t>(ny) * t.w + nx;
          if (t.branches[ni] >= 3 && t.cluster[ni] < 0) {
            t.cluster[ni] = next;
            stack.push_back({nx, ny});
          }
        }
      }
      ++next;
    }
  }
  return t;
}

double chord_angle_deg(const std::vector<std::pair<int, int>>& path, std::size_t i, std::size_t w) {
  if (w == 0 || i < w || i + w >= path.size()) return 0.0;
  const double ax = path[i].first - path[i - w].first;
  const double ay = path[i].second - path[i - w].second;
  const double bx = path[i + w].first - path[i].first;
  const double by = path[i + w].second - path[i].second;
  const double cross = ax * by - ay * bx;
  const double dot = ax * bx + ay * by;
  return std::abs(std::atan2(cross, dot)) * 180.0 / 3.14159265358979323846;
}

}  // namespace

BinaryMask skeletonize(const BinaryMask& mask, int min_component_px) {
  BinaryMask skel = mask;
  drop_small_components(skel, min_component_px);
  const int w = skel.width;
  const int h = skel.height;
  std::vector<std::size_t> kill;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      kill.clear();
      const Grid8 g{skel};
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (!skel.at(x, y)) continue;
          int p[8];
          for (int k = 0; k < 8; ++k) p[k] = g.at(x + kDx[k], y + kDy[k]) ? 1 : 0;
          const int b = p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7];
          if (b < 2 || b > 6) continue;
          int a = 0;
          for (int k = 0; k < 8; ++k) a += (p[k] == 0 && p[(k + 1) % 8] == 1) ? 1 : 0;
          if (a != 1) continue;
          // p[0]=N p[2]=E p[4]=S p[6]=W
          if (pass == 0) {
            if (p[0] * p[2] * p[4] != 0) continue;
            if (p[2] * p[4] * p[6] != 0) continue;
          } else {
            if (p[0] * p[2] * p[6] != 0) continue;
            if (p[0] * p[4] * p[6] != 0) continue;
          }
          kill.push_back(static_cast<std::size_t>(y) * w + x);
        }
      }
      for (std::size_t i : kill) skel.bits[i] = 0;
      changed = changed || !kill.empty();
    }
  }
  return skel;
}

std::vector<Node> extract_nodes(const BinaryMask& skeleton, double turn_angle_min_deg) {
  const SkeletonTopology t = analyze(skeleton);
  const Grid8 g{skeleton};
  std::vector<Node> nodes;

  for (int y = 0; y < t.h; ++y) {
    for (int x = 0; x < t.w; ++x) {
      if (t.on(x, y) && t.is_end(x, y)) {
        nodes.push_back({0, static_cast<double>(x), static_cast<double>(y), NodeKind::end});
      }
    }
  }
  for (const auto& [ry, rx] : t.cluster_rep) {
    nodes.push_back({0, static_cast<double>(rx), static_cast<double>(ry), NodeKind::junction});
  }

  // Turning nodes: walk every maximal degree-2 path between anchors (degree
  // != 2 pixels) and keep local maxima of the 5-px chord angle.
  constexpr std::size_t kChord = 5;
  auto is_anchor = [&](int x, int y) { return t.is_anchor(x, y); };
  std::set<std::pair<int, int>> visited;  // (y, x), path pixels only

  auto scan_path = [&](const std::vector<std::pair<int, int>>& path) {
    std::vector<std::pair<std::size_t, double>> hits;
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
      const std::size_t cw = std::min({kChord, i, path.size() - 1 - i});
      const double ang = chord_angle_deg(path, i, cw);
      if (ang > turn_angle_min_deg) hits.emplace_back(i, ang);
    }
    std::size_t k = 0;
    while (k < hits.size()) {
      std::size_t best = k;
      std::size_t j = k;
      while (j + 1 < hits.size() && hits[j + 1].first <= hits[j].first + 2) {
        ++j;
        if (hits[j].second > hits[best].second) best = j;
      }
      nodes.push_back({0, static_cast<double>(path[hits[best].first].first),
                       static_cast<double>(path[hits[best].first].second), NodeKind::turning});
      k = j + 1;
    }
  };

  auto walk_from = [&](int ax, int ay, int sx, int sy) {
    std::vector<std::pair<int, int>> path;
    path.emplace_back(ax, ay);
    int px = ax, py = ay, cx = sx, cy = sy;
    while (true) {
      path.emplace_back(cx, cy);
      if (is_anchor(cx, cy)) break;
      visited.insert({cy, cx});
      int fx = -1, fy = -1;
      for (int o = 0; o < 8; ++o) {
        const int k = kTraceOrder[o];
        const int qx = cx + kDx[k];
        const int qy = cy + kDy[k];
        if (!t.on(qx, qy) || (qx == px && qy == py)) continue;
        if (!is_anchor(qx, qy) && visited.count({qy, qx})) continue;
        fx = qx;
        fy = qy;
        break;
      }
      if (fx < 0) break;
      px = cx;
      py = cy;
      cx = fx;
      cy = fy;
    }
    scan_path(path);
  };

  for (int y = 0; y < t.h; ++y) {
    for (int x = 0; x < t.w; ++x) {
      if (!t.on(x, y) || !is_anchor(x, y)) continue;
      for (int k = 0; k < 8; ++k) {
        const int sx = x + kDx[k];
        const int sy = y + kDy[k];
        if (!t.on(sx, sy) || is_anchor(sx, sy) || visited.count({sy, sx})) continue;
        walk_from(x, y, sx, sy);
      }
    }
  }
  // Node-free cycles: every pixel is a plain path pixel.
  for (int y = 0; y < t.h; ++y) {
    for (int x = 0; x < t.w; ++x) {
      if (!t.on(x, y) || is_anchor(x, y) || visited.count({y, x})) continue;
      bool has_anchor_neighbor = false;
      for (int k = 0; k < 8; ++k) {
        if (t.on(x + kDx[k], y + kDy[k]) && is_anchor(x + kDx[k], y + kDy[k])) {
          has_anchor_neighbor = true;
        }
      }
      if (has_anchor_neighbor) continue;
      // Walk the loop starting anywhere.
      int first_nx = -1, first_ny = -1;
      for (int k = 0; k < 8 && first_nx < 0; ++k) {
        if (t.on(x + kDx[k], y + kDy[k])) {
          first_nx = x + kDx[k];
          first_ny = y + kDy[k];
        }
      }
      if (first_nx < 0) continue;
      visited.insert({y, x});
      walk_from(x, y, first_nx, first_ny);
    }
  }

  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) {
    return std::tie(a.y, a.x) < std::tie(b.y, b.x);
  });
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].id = static_cast<int>(i);
  return nodes;
}

namespace {

double step_length(const Point& a, const Point& b) {
  return (a.x != b.x && a.y != b.y) ? std::sqrt(2.0) : 1.0;
}

}  // namespace

LineGraph link_edges(const BinaryMask& skeleton, const std::vector<Node>& nodes) {
  LineGraph graph;
  graph.nodes = nodes;
  const SkeletonTopology t = analyze(skeleton);

  // Stop pixels: node positions, plus every junction-cluster member (mapped
  // to that cluster's node).
  std::map<std::pair<int, int>, int> node_at;  // (y, x) -> node id
  std::map<int, int> cluster_node;             // cluster id -> node id
  for (const Node& n : nodes) {
    const int nx = static_cast<int>(n.x);
    const int ny = static_cast<int>(n.y);
    node_at[{ny, nx}] = n.id;
    if (t.on(nx, ny) && t.cluster_at(nx, ny) >= 0) {
      cluster_node[t.cluster_at(nx, ny)] = n.id;
    }
  }
  auto stop_id = [&](int x, int y) -> int {
    auto hit = node_at.find({y, x});
    if (hit != node_at.end()) return hit->second;
    const int c = t.cluster_at(x, y);
    if (c >= 0) {
      auto ch = cluster_node.find(c);
      if (ch != cluster_node.end()) return ch->second;
    }
    return -1;
  };

  std::set<std::pair<int, int>> interior_visited;
  std::set<std::tuple<int, int, int, int>> direct;

  auto emit_edge = [&](int a, int b, std::vector<Point> pts) {
    Edge e;
    e.node_a = a;
    e.node_b = b;
    e.geometry.id = "edge-" + std::to_string(graph.edges.size());
    e.geometry.points = std::move(pts);
    for (std::size_t i = 1; i < e.geometry.points.size(); ++i) {
      e.length += step_length(e.geometry.points[i - 1], e.geometry.points[i]);
    }
    if (e.length > 0.0) graph.edges.push_back(std::move(e));
  };

  // Walk outward from every stop pixel.
  std::vector<std::pair<int, int>> stops;  // (y, x)
  for (int y = 0; y < t.h; ++y) {
    for (int x = 0; x < t.w; ++x) {
      if (t.on(x, y) && stop_id(x, y) >= 0) stops.push_back({y, x});
    }
  }

  for (const auto& [ay, ax] : stops) {
    const int a_id = stop_id(ax, ay);
    for (int k = 0; k < 8; ++k) {
      const int sx = ax + kDx[k];
      const int sy = ay + kDy[k];
      if (!t.on(sx, sy)) continue;
      const int s_stop = stop_id(sx, sy);
      if (s_stop >= 0) {
        if (s_stop == a_id) continue;  // same junction cluster
        const int ka = std::min(a_id, s_stop);
        const int kb = std::max(a_id, s_stop);
        if (!direct.insert({ka, kb, std::min(ay, sy), std::min(ax, sx)}).second) continue;
        emit_edge(a_id, s_stop,
                  {{static_cast<double>(ax), static_cast<double>(ay)},
                   {static_cast<double>(sx), static_cast<double>(sy)}});
        continue;
      }
      if (interior_visited.count({sy, sx})) continue;
      std::vector<Point> pts;
      pts.push_back({static_cast<double>(ax), static_cast<double>(ay)});
      int px = ax, py = ay, cx = sx, cy = sy;
      int end_id = -1;
      while (true) {
        pts.push_back({static_cast<double>(cx), static_cast<double>(cy)});
        const int sid = stop_id(cx, cy);
        if (sid >= 0) {
          end_id = sid;
          break;
        }
        interior_visited.insert({cy, cx});
        int fx = -1, fy = -1;
        for (int o = 0; o < 8; ++o) {
          const int q = kTraceOrder[o];
          const int qx = cx + kDx[q];
          const int qy = cy + kDy[q];
          if (!t.on(qx, qy) || (qx == px && qy == py)) continue;
          if (stop_id(qx, qy) < 0 && interior_visited.count({qy, qx})) continue;
          fx = qx;
          fy = qy;
          break;
        }
        if (fx < 0) break;  // dangling; drop the fragment
        px = cx;
        py = cy;
        cx = fx;
        cy = fy;
      }
      if (end_id >= 0) emit_edge(a_id, end_id, std::move(pts));
    }
  }

  // Cyclic components with no node at all: synthesize one and emit the loop.
  for (int y = 0; y < t.h; ++y) {
    for (int x = 0; x < t.w; ++x) {
      if (!t.on(x, y) || stop_id(x, y) >= 0 || interior_visited.count({y, x})) continue;
      if (t.deg(x, y) == 0) continue;
      const int id = static_cast<int>(graph.nodes.size());
      graph.nodes.push_back(
          {id, static_cast<double>(x), static_cast<double>(y), NodeKind::turning});
      node_at[{y, x}] = id;
      std::vector<Point> pts;
      pts.push_back({static_cast<double>(x), static_cast<double>(y)});
      interior_visited.insert({y, x});
      int first_nx = -1, first_ny = -1;
      for (int k = 0; k < 8 && first_nx < 0; ++k) {
        if (t.on(x + kDx[k], y + kDy[k])) {
          first_nx = x + kDx[k];
          first_ny = y + kDy[k];
        }
      }
      if (first_nx < 0) continue;
      int px = x, py = y, cx = first_nx, cy = first_ny;
      while (true) {
        pts.push_back({static_cast<double>(cx), static_cast<double>(cy)});
        if (cx == x && cy == y) break;
        interior_visited.insert({cy, cx});
        int fx = -1, fy = -1;
        for (int o = 0; o < 8; ++o) {
          const int q = kTraceOrder[o];
          const int qx = cx + kDx[q];
          const int qy = cy + kDy[q];
          if (!t.on(qx, qy) || (qx == px && qy == py)) continue;
          if (interior_visited.count({qy, qx}) && !(qx == x && qy == y)) continue;
          fx = qx;
          fy = qy;
          break;
        }
        if (fx < 0) break;
        px = cx;
        py = cy;
        cx = fx;
        cy = fy;
      }
      emit_edge(id, id, std::move(pts));
    }
  }

  return graph;
}

LineGraph mask_to_graph(const BinaryMask& mask, const VectorizeOptions& opts) {
  const BinaryMask skel = skeletonize(mask, opts.min_component_px);
  return link_edges(skel, extract_nodes(skel, opts.turn_angle_min_deg));
}

LineGraph graph_from_polylines(const std::vector<Polyline>& lines) {
  LineGraph graph;
  constexpr double kMergeDist = 0.25;
  auto find_or_add = [&](const Point& p) {
    for (const Node& n : graph.nodes) {
      const double dx = n.x - p.x;
      const double dy = n.y - p.y;
      if (dx * dx + dy * dy <= kMergeDist * kMergeDist) return n.id;
    }
    const int id = static_cast<int>(graph.nodes.size());
    graph.nodes.push_back({id, p.x, p.y, NodeKind::end});
    return id;
  };
  for (const Polyline& line : lines) {
    if (line.points.size() < 2) throw std::invalid_argument("graph_from_polylines: short line");
    Edge e;
    e.node_a = find_or_add(line.points.front());
    e.node_b = find_or_add(line.points.back());
    e.geometry = line;
    e.length = polyline_length(line);
    if (e.length <= 0.0) continue;
    graph.edges.push_back(std::move(e));
  }
  std::vector<int> degree(graph.nodes.size(), 0);
  for (const Edge& e : graph.edges) {
    ++degree[e.node_a];
    ++degree[e.node_b];
  }
  for (Node& n : graph.nodes) {
    n.kind = degree[n.id] >= 3 ? NodeKind::junction : NodeKind::end;
  }
  return graph;
}

std::vector<Polyline> graph_to_polylines(const LineGraph& graph) {
  std::vector<Polyline> lines;
  for (const Edge& e : graph.edges) {
    Polyline line = e.geometry;
    if (line.id.empty()) line.id = "edge-" + std::to_string(lines.size());
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace annofix::vectorize
