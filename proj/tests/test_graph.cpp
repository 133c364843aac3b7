#include <doctest.h>

#include <set>

#include "chartrevive/error.hpp"
#include "chartrevive/graph.hpp"
#include "chartrevive/rng.hpp"

using namespace chartrevive;
using namespace chartrevive::graph;
using svg::ElemKind;

TEST_CASE("single text element forms a 4-node cycle with no element edges") {
  auto doc = svg::parse_svg(
      "<svg width=\"100\" height=\"100\"><text x=\"10\" y=\"20\" font-size=\"10\">Hi</text></svg>");
  ChartGraph g = build_graph(doc);
  CHECK(g.nodes.size() == 4);
  CHECK(g.stroke_edges.size() == 4);
  CHECK(g.element_edge_count() == 2);  // the two bbox diagonals
}

TEST_CASE("two line elements: 4 nodes, 2 stroke edges, 4 element edges") {
  auto doc = svg::parse_svg(
      "<svg width=\"100\" height=\"100\">"
      "<line x1=\"0\" y1=\"0\" x2=\"10\" y2=\"0\"/>"
      "<line x1=\"0\" y1=\"5\" x2=\"10\" y2=\"5\"/></svg>");
  ChartGraph g = build_graph(doc);
  CHECK(g.nodes.size() == 4);
  CHECK(g.stroke_edges.size() == 2);
  CHECK(g.element_edge_count() == 4);  // C(4,2) - 2
  CHECK(g.element_edges().size() == 4);
}

TEST_CASE("path anchors normalize positions by the viewport") {
  auto doc = svg::parse_svg(
      "<svg width=\"100\" height=\"100\"><path d=\"M0 0 L10 0 L20 0\"/></svg>");
  ChartGraph g = build_graph(doc);
  REQUIRE(g.nodes.size() == 3);
  CHECK(g.stroke_edges.size() == 2);
  CHECK(g.nodes[0].features[8] == doctest::Approx(0.0));
  CHECK(g.nodes[1].features[8] == doctest::Approx(0.1));
  CHECK(g.nodes[2].features[8] == doctest::Approx(0.2));
  CHECK(g.nodes[1].features[9] == doctest::Approx(0.0));
}

TEST_CASE("node feature layout matches the documented slots") {
  auto doc = svg::parse_svg(
      "<svg width=\"500\" height=\"400\">"
      "<line x1=\"50\" y1=\"200\" x2=\"60\" y2=\"210\" stroke=\"#000\" stroke-width=\"2\"/></svg>");
  const svg::SvgElement& e = doc.elements[0];
  auto f = node_feature_vector(e, {50, 200}, doc);
  // one-hot: line is slot 1
  std::array<float, 17> expect{0, 1, 0, 0, 0, 0, 0, 0, 0.1f, 0.5f, -1, -1, -1, 0, 0, 0, 0.004f};
  for (int i = 0; i < 17; ++i) CHECK(f[size_t(i)] == doctest::Approx(expect[size_t(i)]));
  float onehot_sum = 0;
  for (int i = 0; i < 8; ++i) onehot_sum += f[size_t(i)];
  CHECK(onehot_sum == 1.0f);
}

TEST_CASE("text node without paints gets -1 color slots and zero width") {
  auto doc = svg::parse_svg(
      "<svg width=\"100\" height=\"100\"><text x=\"1\" y=\"2\" font-size=\"8\">x</text></svg>");
  auto f = node_feature_vector(doc.elements[0], {1, 2}, doc);
  for (int i = 10; i <= 15; ++i) CHECK(f[size_t(i)] == -1.0f);
  CHECK(f[16] == 0.0f);
}

TEST_CASE("rect fill feeds the fill slots") {
  auto doc = svg::parse_svg(
      "<svg width=\"100\" height=\"100\"><rect width=\"5\" height=\"5\" fill=\"#ff0000\"/></svg>");
  auto f = node_feature_vector(doc.elements[0], {0, 0}, doc);
  CHECK(f[10] == 1.0f);
  CHECK(f[11] == 0.0f);
  CHECK(f[12] == 0.0f);
}

TEST_CASE("empty document gives an empty graph") {
  auto doc = svg::parse_svg("<svg width=\"10\" height=\"10\"/>");
  ChartGraph g = build_graph(doc);
  CHECK(g.nodes.empty());
  CHECK(g.stroke_edges.empty());
  CHECK(g.element_edge_count() == 0);
}

TEST_CASE("build_graph is deterministic") {
  std::string text =
      "<svg width=\"100\" height=\"100\"><rect width=\"5\" height=\"5\"/>"
      "<circle cx=\"10\" cy=\"10\" r=\"4\" fill=\"teal\"/>"
      "<path d=\"M0 0 L5 5 L9 1 Z\"/></svg>";
  ChartGraph a = build_graph(svg::parse_svg(text));
  ChartGraph b = build_graph(svg::parse_svg(text));
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].owner_element == b.nodes[i].owner_element);
    CHECK(a.nodes[i].features == b.nodes[i].features);
  }
  CHECK(a.stroke_edges == b.stroke_edges);
  CHECK(a.element_edges() == b.element_edges());
}

TEST_CASE("element edge count equals the brute-force recount on random documents") {
  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    std::string inner;
    int elems = int(rng.uniform_int(1, 8));
    for (int e = 0; e < elems; ++e) {
      switch (rng.uniform_int(0, 3)) {
        case 0: inner += "<rect x=\"1\" y=\"1\" width=\"4\" height=\"4\"/>"; break;
        case 1: inner += "<line x1=\"0\" y1=\"0\" x2=\"9\" y2=\"9\"/>"; break;
        case 2: inner += "<circle cx=\"5\" cy=\"5\" r=\"2\"/>"; break;
        default: inner += "<path d=\"M0 0 L3 1 L6 0\"/>"; break;
      }
    }
    auto doc = svg::parse_svg("<svg width=\"20\" height=\"20\">" + inner + "</svg>");
    ChartGraph g = build_graph(doc);

    // brute force: enumerate all pairs
    std::set<std::pair<int, int>> stroke(g.stroke_edges.begin(), g.stroke_edges.end());
    size_t count = 0;
    for (size_t i = 0; i < g.nodes.size(); ++i)
      for (size_t j = i + 1; j < g.nodes.size(); ++j) {
        if (g.nodes[i].kind != g.nodes[j].kind) continue;
        if (stroke.count({int(i), int(j)})) continue;
        ++count;
      }
    CHECK(g.element_edge_count() == count);
    CHECK(g.element_edges().size() == count);
  }
}

TEST_CASE("element ownership: every node belongs to exactly one element") {
  auto doc = svg::parse_svg(
      "<svg width=\"50\" height=\"50\"><polyline points=\"0,0 5,5 9,3\"/>"
      "<polygon points=\"1,1 8,1 4,7\"/><ellipse cx=\"9\" cy=\"9\" rx=\"3\" ry=\"2\"/></svg>");
  ChartGraph g = build_graph(doc);
  std::vector<int> owner_count(g.nodes.size(), 0);
  for (size_t e = 0; e < g.element_nodes.size(); ++e)
    for (int n : g.element_nodes[e]) {
      CHECK(g.nodes[size_t(n)].owner_element == int(e));
      ++owner_count[size_t(n)];
    }
  for (int c : owner_count) CHECK(c == 1);
  // polygon closing edge present: 3 points -> 3 stroke edges
  CHECK(g.element_nodes[1].size() == 3);
}

TEST_CASE("node cap raises GraphTooLarge") {
  std::string inner;
  for (int i = 0; i < 1001; ++i) inner += "<line x1=\"0\" y1=\"0\" x2=\"1\" y2=\"1\"/>";
  auto doc = svg::parse_svg("<svg width=\"10\" height=\"10\">" + inner + "</svg>");
  CHECK_THROWS_AS(build_graph(doc), Error);
}

TEST_CASE("graph debug json has the documented shape") {
  auto doc = svg::parse_svg(
      "<svg width=\"10\" height=\"10\"><line x1=\"0\" y1=\"0\" x2=\"1\" y2=\"1\"/></svg>");
  std::string j = graph_debug_json(build_graph(doc));
  CHECK(j.find("\"nodes\"") != std::string::npos);
  CHECK(j.find("\"strokeEdges\"") != std::string::npos);
  CHECK(j.find("\"elementEdges\"") != std::string::npos);
}
