#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "chartrevive/svg.hpp"

namespace chartrevive::graph {

inline constexpr int kFeatureDim = 17;  // one-hot(8) | pos(2) | fill(3) | stroke(3) | width(1)
inline constexpr int kMaxNodes = 2000;

struct GraphNode {
  int node_id = 0;
  int owner_element = 0;
  svg::ElemKind kind = svg::ElemKind::Path;
  std::array<float, kFeatureDim> features{};
};

// Multi-graph over chart geometry. Stroke-wise edges join nodes that are
// directly connected in the drawing; element-wise edges join all node pairs
// of the same SVG element kind that are not already stroke-connected.
// Element-wise edges are fully determined by node kinds plus the stroke
// set, so they are materialized on demand rather than stored.
struct ChartGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::pair<int, int>> stroke_edges;      // i < j, sorted, unique
  std::vector<std::vector<int>> stroke_adj;           // per node
  std::vector<std::vector<int>> element_nodes;        // element index -> node ids
  std::array<std::vector<int>, svg::kElemKindCount> kind_nodes;

  size_t element_edge_count() const;
  std::vector<std::pair<int, int>> element_edges() const;

  // Neighbors over element-wise edges for one node (same kind, not self,
  // not a stroke neighbor).
  std::vector<int> element_neighbors(int node) const;
};

ChartGraph build_graph(const svg::SvgDocument& doc);

std::array<float, kFeatureDim> node_feature_vector(const svg::SvgElement& e, svg::Point point,
                                                   const svg::SvgDocument& doc);

// Anchor points contributed by one element, in node order.
std::vector<svg::Point> element_anchors(const svg::SvgElement& e);

std::string graph_debug_json(const ChartGraph& g);

}  // namespace chartrevive::graph
