#pragma once

#include <vector>

#include "annofix/geometry.hpp"
#include "annofix/grid.hpp"

namespace annofix::vectorize {

enum class NodeKind { end, turning, junction };

struct Node {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  NodeKind kind = NodeKind::end;
};

struct Edge {
  int node_a = 0;
  int node_b = 0;
  Polyline geometry;     // pixel chain including both node pixels
  double length = 0.0;   // sum of steps (1 or sqrt(2))
};

struct LineGraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  bool empty() const { return nodes.empty() && edges.empty(); }
  double total_length() const {
    double len = 0.0;
    for (const Edge& e : edges) len += e.length;
    return len;
  }
};

struct VectorizeOptions {
  double turn_angle_min_deg = 30.0;
  int min_component_px = 4;  // smaller components are discarded as noise
};

/// Zhang-Suen thinning to a 1-px-wide 8-connected skeleton. Components below
/// min_component_px are dropped first. Idempotent.
BinaryMask skeletonize(const BinaryMask& mask, int min_component_px = 4);

/// End nodes (exactly one 8-neighbor), junction nodes (three or more), and
/// turning nodes where the direction over a 5-px chord bends more than
/// turn_angle_min degrees.
std::vector<Node> extract_nodes(const BinaryMask& skeleton, double turn_angle_min_deg = 30.0);

/// Walks skeleton paths between adjacent nodes. Every skeleton pixel ends up
/// in exactly one edge geometry or is a node pixel. A cyclic component with
/// no node gets one synthetic node at its topmost-leftmost pixel.
LineGraph link_edges(const BinaryMask& skeleton, const std::vector<Node>& nodes);

/// skeletonize + extract_nodes + link_edges.
LineGraph mask_to_graph(const BinaryMask& mask, const VectorizeOptions& opts = {});

/// Graph from loose polylines: one edge per line, endpoints merged within a
/// quarter pixel.
LineGraph graph_from_polylines(const std::vector<Polyline>& lines);

std::vector<Polyline> graph_to_polylines(const LineGraph& graph);

}  // namespace annofix::vectorize
