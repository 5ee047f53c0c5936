#include "annofix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace annofix::metrics {

using vectorize::Edge;
using vectorize::LineGraph;
using vectorize::Node;

PixelScore pixel_prf(const BinaryMask& pred, const BinaryMask& gt) {
  if (!pred.same_dims(gt.width, gt.height)) {
    throw std::invalid_argument("pixel_prf: dimensions differ");
  }
  PixelScore s;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred.bits[i] && gt.bits[i]) ++s.tp;
    else if (pred.bits[i]) ++s.fp;
    else if (gt.bits[i]) ++s.fn;
  }
  if (s.tp + s.fp > 0) {
    s.precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
  } else {
    s.zero_division = true;
  }
  if (s.tp + s.fn > 0) {
    s.recall = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
  } else {
    s.zero_division = true;
  }
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                        : 0.0;
  return s;
}

namespace {

struct SegmentRef {
  Point a;
  Point b;
  BoundingBox box;
};

std::vector<SegmentRef> collect_segments(const LineGraph& g, double pad) {
  std::vector<SegmentRef> segs;
  for (const Edge& e : g.edges) {
    for (std::size_t i = 1; i < e.geometry.points.size(); ++i) {
      SegmentRef s{e.geometry.points[i - 1], e.geometry.points[i], {}};
      s.box.expand(s.a);
      s.box.expand(s.b);
      s.box.pad(pad);
      segs.push_back(s);
    }
  }
  return segs;
}

bool within(const std::vector<SegmentRef>& segs, const Point& p, double tol2) {
  for (const SegmentRef& s : segs) {
    if (p.x < s.box.min_x || p.x > s.box.max_x || p.y < s.box.min_y || p.y > s.box.max_y) continue;
    if (point_segment_dist2(p, s.a, s.b) <= tol2) return true;
  }
  return false;
}

/// Matched arc length of one graph against the segments of the other.
std::pair<double, double> matched_length(const LineGraph& g, const std::vector<SegmentRef>& other,
                                         double tol) {
  const double tol2 = tol * tol;
  double matched = 0.0;
  double total = 0.0;
  for (const Edge& e : g.edges) {
    const double len = polyline_length(e.geometry);
    if (len <= 0.0) continue;
    const std::vector<Point> samples = resample_polyline(e.geometry, 0.5);
    if (samples.empty()) continue;
    long hit = 0;
    for (const Point& p : samples) {
      if (within(other, p, tol2)) ++hit;
    }
    total += len;
    matched += len * static_cast<double>(hit) / static_cast<double>(samples.size());
  }
  return {matched, total};
}

}  // namespace

LineScore correctness_completeness(const LineGraph& pred, const LineGraph& gt, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("correctness_completeness: tol must be > 0");
  LineScore s;
  const std::vector<SegmentRef> pred_segs = collect_segments(pred, tol);
  const std::vector<SegmentRef> gt_segs = collect_segments(gt, tol);
  auto [mp, tp] = matched_length(pred, gt_segs, tol);
  auto [mg, tg] = matched_length(gt, pred_segs, tol);
  s.matched_pred_len = mp;
  s.total_pred_len = tp;
  s.matched_gt_len = mg;
  s.total_gt_len = tg;
  s.pred_empty = tp <= 0.0;
  s.gt_empty = tg <= 0.0;
  s.correctness = s.pred_empty ? 0.0 : mp / tp;
  s.completeness = s.gt_empty ? 0.0 : mg / tg;
  return s;
}

// --- APLS --------------------------------------------------------------------

namespace {

/// Maximal geometric chain through degree-2 nodes. Anchors (degree != 2
/// nodes) terminate chains; a node-free cycle forms a closed chain.
struct Chain {
  std::vector<Point> pts;
  std::vector<double> cum;  // cumulative arc length, cum[0] = 0
  int anchor_a = -1;        // control-graph node ids; -1 for a closed chain
  int anchor_b = -1;

  double length() const { return cum.empty() ? 0.0 : cum.back(); }
  Point at_arc(double t) const {
    if (t <= 0.0) return pts.front();
    if (t >= length()) return pts.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - cum.begin());
    const double seg = cum[i] - cum[i - 1];
    const double f = seg > 0.0 ? (t - cum[i - 1]) / seg : 0.0;
    return {pts[i - 1].x + f * (pts[i].x - pts[i - 1].x),
            pts[i - 1].y + f * (pts[i].y - pts[i - 1].y)};
  }
};

struct ChainSet {
  std::vector<Chain> chains;
  std::vector<Point> anchors;  // control-graph nodes 0..n-1
};

void append_edge_geometry(std::vector<Point>& pts, const Edge& e, bool forward) {
  std::vector<Point> g = e.geometry.points;
  if (!forward) std::reverse(g.begin(), g.end());
  const std::size_t start = pts.empty() ? 0 : 1;  // shared junction point
  for (std::size_t i = start; i < g.size(); ++i) pts.push_back(g[i]);
}

ChainSet build_chains(const LineGraph& g) {
  ChainSet cs;
  std::vector<std::vector<std::pair<int, bool>>> incident(g.nodes.size());  // (edge, is_a_end)
  std::vector<int> degree(g.nodes.size(), 0);
  for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
    const Edge& e = g.edges[ei];
    incident[e.node_a].push_back({static_cast<int>(ei), true});
    incident[e.node_b].push_back({static_cast<int>(ei), false});
    ++degree[e.node_a];
    ++degree[e.node_b];
  }
  std::vector<int> anchor_id(g.nodes.size(), -1);
  for (const Node& n : g.nodes) {
    if (degree[n.id] == 0) continue;
    if (degree[n.id] != 2) {
      anchor_id[n.id] = static_cast<int>(cs.anchors.size());
      cs.anchors.push_back({n.x, n.y});
    }
  }

  std::vector<char> used(g.edges.size(), 0);
  auto finish_chain = [&](Chain&& ch) {
    ch.cum.resize(ch.pts.size(), 0.0);
    for (std::size_t i = 1; i < ch.pts.size(); ++i) {
      ch.cum[i] = ch.cum[i - 1] + std::sqrt(dist2(ch.pts[i - 1], ch.pts[i]));
    }
    if (ch.length() > 0.0) cs.chains.push_back(std::move(ch));
  };

  for (const Node& n : g.nodes) {
    if (anchor_id[n.id] < 0) continue;
    for (const auto& [ei0, fwd0] : incident[n.id]) {
      if (used[ei0]) continue;
      Chain ch;
      ch.anchor_a = anchor_id[n.id];
      int cur_edge = ei0;
      bool forward = fwd0;
      int cur_node = n.id;
      while (true) {
        used[cur_edge] = 1;
        append_edge_geometry(ch.pts, g.edges[cur_edge], forward);
        const Edge& e = g.edges[cur_edge];
        const int next_node = forward ? e.node_b : e.node_a;
        if (anchor_id[next_node] >= 0) {
          ch.anchor_b = anchor_id[next_node];
          break;
        }
        int follow = -1;
        bool follow_fwd = true;
        for (const auto& [ej, fj] : incident[next_node]) {
          if (used[ej]) continue;
          follow = ej;
          follow_fwd = fj;
          break;
        }
        if (follow < 0) {  // degree-2 loop closing back onto this chain
          ch.anchor_b = anchor_id[next_node];
          break;
        }
        cur_edge = follow;
        forward = follow_fwd;
        cur_node = next_node;
      }
      if (ch.anchor_b >= 0) finish_chain(std::move(ch));
    }
  }

  // Remaining edges belong to closed degree-2 cycles.
  for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
    if (used[ei]) continue;
    Chain ch;
    int cur_edge = static_cast<int>(ei);
    bool forward = true;
    while (cur_edge >= 0 && !used[cur_edge]) {
      used[cur_edge] = 1;
      append_edge_geometry(ch.pts, g.edges[cur_edge], forward);
      const Edge& e = g.edges[cur_edge];
      const int next_node = forward ? e.node_b : e.node_a;
      int follow = -1;
      bool follow_fwd = true;
      for (const auto& [ej, fj] : incident[next_node]) {
        if (used[ej]) continue;
        follow = ej;
        follow_fwd = fj;
        break;
      }
      cur_edge = follow;
      forward = follow_fwd;
    }
    finish_chain(std::move(ch));
  }
  return cs;
}

/// Graph over anchors plus marker points placed at arc positions on chains.
struct PathGraph {
  struct Marker {
    int chain = -1;
    double arc = 0.0;
    Point where;
  };

  const ChainSet* cs = nullptr;
  std::vector<Marker> markers;                            // node = n_anchors + index
  std::vector<std::vector<std::pair<int, double>>> adj;   // (node, length)

  int n_anchors() const { return static_cast<int>(cs->anchors.size()); }
  int add_marker(int chain, double arc) {
    markers.push_back({chain, arc, cs->chains[chain].at_arc(arc)});
    return n_anchors() + static_cast<int>(markers.size()) - 1;
  }
  Point position(int node) const {
    return node < n_anchors() ? cs->anchors[node] : markers[node - n_anchors()].where;
  }

  void build() {
    adj.assign(n_anchors() + markers.size(), {});
    std::vector<std::vector<std::pair<double, int>>> per_chain(cs->chains.size());
    for (std::size_t mi = 0; mi < markers.size(); ++mi) {
      per_chain[markers[mi].chain].push_back({markers[mi].arc, n_anchors() + static_cast<int>(mi)});
    }
    auto connect = [&](int a, int b, double len) {
      if (a == b && len <= 0.0) return;
      adj[a].push_back({b, len});
      adj[b].push_back({a, len});
    };
    for (std::size_t ci = 0; ci < cs->chains.size(); ++ci) {
      const Chain& ch = cs->chains[ci];
      auto& ms = per_chain[ci];
      std::sort(ms.begin(), ms.end());
      if (ch.anchor_a >= 0) {
        int prev_node = ch.anchor_a;
        double prev_arc = 0.0;
        for (const auto& [arc, node] : ms) {
          connect(prev_node, node, arc - prev_arc);
          prev_node = node;
          prev_arc = arc;
        }
        connect(prev_node, ch.anchor_b, ch.length() - prev_arc);
      } else if (!ms.empty()) {
        // Closed chain: ring of markers.
        for (std::size_t i = 1; i < ms.size(); ++i) {
          connect(ms[i - 1].second, ms[i].second, ms[i].first - ms[i - 1].first);
        }
        connect(ms.back().second, ms.front().second,
                ch.length() - ms.back().first + ms.front().first);
      }
    }
  }

  std::vector<double> dijkstra(int src) const {
    std::vector<double> dist(adj.size(), std::numeric_limits<double>::infinity());
    std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                        std::greater<>> pq;
    dist[src] = 0.0;
    pq.push({0.0, src});
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (const auto& [v, len] : adj[u]) {
        if (dist[u] + len < dist[v]) {
          dist[v] = dist[u] + len;
          pq.push({dist[v], v});
        }
      }
    }
    return dist;
  }
};

struct SnapResult {
  bool ok = false;
  int chain = -1;
  double arc = 0.0;
};

SnapResult snap_to_chains(const ChainSet& cs, const Point& p, double radius) {
  SnapResult best;
  double best_d2 = radius * radius;
  for (std::size_t ci = 0; ci < cs.chains.size(); ++ci) {
    const Chain& ch = cs.chains[ci];
    for (std::size_t i = 1; i < ch.pts.size(); ++i) {
      const Point& a = ch.pts[i - 1];
      const Point& b = ch.pts[i];
      const double vx = b.x - a.x;
      const double vy = b.y - a.y;
      const double len2 = vx * vx + vy * vy;
      double t = 0.0;
      if (len2 > 0.0) {
        t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0);
      }
      const Point q{a.x + t * vx, a.y + t * vy};
      const double d2 = dist2(p, q);
      if (d2 <= best_d2) {
        best_d2 = d2;
        best.ok = true;
        best.chain = static_cast<int>(ci);
        best.arc = ch.cum[i - 1] + t * std::sqrt(len2);
      }
    }
  }
  return best;
}

/// One direction: control nodes on `truth`, snapped onto `proposal`.
double apls_directional(const LineGraph& proposal, const LineGraph& truth, double spacing,
                        double snap_radius) {
  const ChainSet truth_chains = build_chains(truth);
  const ChainSet prop_chains = build_chains(proposal);

  PathGraph tg;
  tg.cs = &truth_chains;
  std::vector<int> controls;
  for (int a = 0; a < tg.n_anchors(); ++a) controls.push_back(a);
  for (std::size_t ci = 0; ci < truth_chains.chains.size(); ++ci) {
    const Chain& ch = truth_chains.chains[ci];
    const double len = ch.length();
    for (double arc = spacing; arc < len - 1e-9; arc += spacing) {
      controls.push_back(tg.add_marker(static_cast<int>(ci), arc));
    }
    if (ch.anchor_a < 0) {  // closed chain: anchor the ring at arc 0
      controls.push_back(tg.add_marker(static_cast<int>(ci), 0.0));
    }
  }
  tg.build();

  PathGraph pg;
  pg.cs = &prop_chains;
  std::vector<int> snapped(controls.size(), -1);
  for (std::size_t i = 0; i < controls.size(); ++i) {
    const SnapResult snap = snap_to_chains(prop_chains, tg.position(controls[i]), snap_radius);
    if (snap.ok) snapped[i] = pg.add_marker(snap.chain, snap.arc);
  }
  pg.build();

  double penalty_sum = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < controls.size(); ++i) {
    const std::vector<double> t_dist = tg.dijkstra(controls[i]);
    const std::vector<double> p_dist =
        snapped[i] >= 0 ? pg.dijkstra(snapped[i]) : std::vector<double>();
    for (std::size_t j = i + 1; j < controls.size(); ++j) {
      const double lt = t_dist[controls[j]];
      if (!std::isfinite(lt) || lt <= 0.0) continue;  // disconnected or coincident in truth
      ++pairs;
      if (snapped[i] < 0 || snapped[j] < 0) {
        penalty_sum += 1.0;
        continue;
      }
      const double lp = p_dist[snapped[j]];
      if (!std::isfinite(lp)) {
        penalty_sum += 1.0;
        continue;
      }
      penalty_sum += std::min(1.0, std::abs(lt - lp) / lt);
    }
  }
  if (pairs == 0) return 1.0;
  return 1.0 - penalty_sum / static_cast<double>(pairs);
}

}  // namespace

double apls(const LineGraph& pred, const LineGraph& gt, double control_spacing,
            double snap_radius) {
  if (control_spacing <= 0.0) throw std::invalid_argument("apls: spacing must be > 0");
  const bool pred_has = !pred.edges.empty();
  const bool gt_has = !gt.edges.empty();
  if (!pred_has && !gt_has) return 1.0;
  if (!pred_has || !gt_has) return 0.0;
  const double forward = apls_directional(pred, gt, control_spacing, snap_radius);
  const double backward = apls_directional(gt, pred, control_spacing, snap_radius);
  return 0.5 * (forward + backward);
}

}  // namespace annofix::metrics
