#include "chartrevive/graph.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "chartrevive/error.hpp"

namespace chartrevive::graph {

namespace {

using svg::ElemKind;
using svg::Point;
using svg::SvgElement;

// Anchors and the stroke edges among them, expressed as local index pairs.
struct ElementSkeleton {
  std::vector<Point> anchors;
  std::vector<std::pair<int, int>> edges;
};

ElementSkeleton element_skeleton(const SvgElement& e) {
  ElementSkeleton sk;
  switch (e.kind) {
    case ElemKind::Path: {
      // One node per anchor point; curved segments contribute endpoints only.
      for (const svg::Subpath& sp : e.path.subpaths) {
        int first = -1;
        int prev = -1;
        for (const svg::Segment& s : sp.segments) {
          if (s.kind == svg::SegKind::ClosePath) {
            if (prev >= 0 && first >= 0 && prev != first) sk.edges.push_back({first, prev});
            continue;
          }
          int idx = int(sk.anchors.size());
          sk.anchors.push_back(s.to);
          if (s.kind == svg::SegKind::MoveTo) {
            first = idx;
          } else if (prev >= 0) {
            sk.edges.push_back({prev, idx});
          }
          prev = idx;
        }
      }
      break;
    }
    case ElemKind::Line:
      sk.anchors = {e.p1, e.p2};
      sk.edges = {{0, 1}};
      break;
    case ElemKind::Rect:
      // top-left and bottom-right
      sk.anchors = {{e.rect.x, e.rect.y}, {e.rect.x + e.rect.w, e.rect.y + e.rect.h}};
      sk.edges = {{0, 1}};
      break;
    case ElemKind::Circle:
    case ElemKind::Ellipse:
      // leftmost and rightmost points
      sk.anchors = {{e.center.x - e.rx, e.center.y}, {e.center.x + e.rx, e.center.y}};
      sk.edges = {{0, 1}};
      break;
    case ElemKind::Polyline:
    case ElemKind::Polygon: {
      sk.anchors = e.points;
      for (int i = 0; i + 1 < int(e.points.size()); ++i) sk.edges.push_back({i, i + 1});
      if (e.kind == ElemKind::Polygon && e.points.size() > 2)
        sk.edges.push_back({0, int(e.points.size()) - 1});
      break;
    }
    case ElemKind::Text: {
      // bbox corners as a 4-node cycle
      svg::Rect r = svg::text_bbox(e.text);
      sk.anchors = {{r.x, r.y}, {r.x + r.w, r.y}, {r.x + r.w, r.y + r.h}, {r.x, r.y + r.h}};
      sk.edges = {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
      break;
    }
  }
  return sk;
}

}  // namespace

std::vector<Point> element_anchors(const SvgElement& e) { return element_skeleton(e).anchors; }

std::array<float, kFeatureDim> node_feature_vector(const SvgElement& e, Point point,
                                                   const svg::SvgDocument& doc) {
  std::array<float, kFeatureDim> f{};
  f[int(e.kind)] = 1.0f;
  f[8] = float(point.x / doc.width);
  f[9] = float(point.y / doc.height);
  if (e.fill) {
    f[10] = float(e.fill->r);
    f[11] = float(e.fill->g);
    f[12] = float(e.fill->b);
  } else {
    f[10] = f[11] = f[12] = -1.0f;
  }
  if (e.stroke) {
    f[13] = float(e.stroke->r);
    f[14] = float(e.stroke->g);
    f[15] = float(e.stroke->b);
  } else {
    f[13] = f[14] = f[15] = -1.0f;
  }
  double wnorm = e.stroke_width / std::max(doc.width, doc.height);
  f[16] = float(std::clamp(wnorm, 0.0, 1.0));
  return f;
}

ChartGraph build_graph(const svg::SvgDocument& doc) {
  ChartGraph g;
  g.element_nodes.resize(doc.elements.size());

  for (const SvgElement& e : doc.elements) {
    ElementSkeleton sk = element_skeleton(e);
    int base = int(g.nodes.size());
    if (base + int(sk.anchors.size()) > kMaxNodes)
      raise(Errc::GraphTooLarge, "document exceeds " + std::to_string(kMaxNodes) + " nodes");
    for (const Point& p : sk.anchors) {
      GraphNode n;
      n.node_id = int(g.nodes.size());
      n.owner_element = e.index;
      n.kind = e.kind;
      n.features = node_feature_vector(e, p, doc);
      g.kind_nodes[int(e.kind)].push_back(n.node_id);
      g.element_nodes[e.index].push_back(n.node_id);
      g.nodes.push_back(n);
    }
    for (auto [a, b] : sk.edges) {
      int i = base + a, j = base + b;
      g.stroke_edges.push_back({std::min(i, j), std::max(i, j)});
    }
  }

  std::sort(g.stroke_edges.begin(), g.stroke_edges.end());
  g.stroke_edges.erase(std::unique(g.stroke_edges.begin(), g.stroke_edges.end()),
                       g.stroke_edges.end());

  g.stroke_adj.resize(g.nodes.size());
  for (auto [i, j] : g.stroke_edges) {
    g.stroke_adj[i].push_back(j);
    g.stroke_adj[j].push_back(i);
  }
  for (auto& adj : g.stroke_adj) std::sort(adj.begin(), adj.end());
  return g;
}

size_t ChartGraph::element_edge_count() const {
  // All same-kind pairs minus stroke edges (stroke edges never cross
  // elements, so every stroke edge joins a same-kind pair).
  size_t total = 0;
  for (const auto& kn : kind_nodes) total += kn.size() * (kn.size() - 1) / 2;
  return total - stroke_edges.size();
}

std::vector<std::pair<int, int>> ChartGraph::element_edges() const {
  std::set<std::pair<int, int>> stroke(stroke_edges.begin(), stroke_edges.end());
  std::vector<std::pair<int, int>> out;
  out.reserve(element_edge_count());
  for (const auto& kn : kind_nodes)
    for (size_t a = 0; a < kn.size(); ++a)
      for (size_t b = a + 1; b < kn.size(); ++b) {
        std::pair<int, int> e{std::min(kn[a], kn[b]), std::max(kn[a], kn[b])};
        if (!stroke.count(e)) out.push_back(e);
      }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> ChartGraph::element_neighbors(int node) const {
  const auto& kn = kind_nodes[int(nodes[node].kind)];
  const auto& adj = stroke_adj[node];
  std::vector<int> out;
  out.reserve(kn.size());
  for (int j : kn) {
    if (j == node) continue;
    if (std::binary_search(adj.begin(), adj.end(), j)) continue;
    out.push_back(j);
  }
  return out;
}

std::string graph_debug_json(const ChartGraph& g) {
  nlohmann::ordered_json j;
  j["nodes"] = nlohmann::json::array();
  for (const GraphNode& n : g.nodes) {
    nlohmann::ordered_json node;
    node["id"] = n.node_id;
    node["element"] = n.owner_element;
    node["features"] = n.features;
    j["nodes"].push_back(node);
  }
  j["strokeEdges"] = nlohmann::json::array();
  for (auto [a, b] : g.stroke_edges) j["strokeEdges"].push_back({a, b});
  j["elementEdges"] = nlohmann::json::array();
  for (auto [a, b] : g.element_edges()) j["elementEdges"].push_back({a, b});
  return j.dump(2);
}

}  // namespace chartrevive::graph
