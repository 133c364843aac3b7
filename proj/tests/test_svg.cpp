#include <doctest.h>

#include <cmath>

#include "chartrevive/error.hpp"
#include "chartrevive/rng.hpp"
#include "chartrevive/svg.hpp"
#include "reference/oracles.hpp"

using namespace chartrevive;
using namespace chartrevive::svg;

TEST_CASE("empty document parses with zero elements") {
  SvgDocument doc = parse_svg("<svg width=\"10\" height=\"10\"/>");
  CHECK(doc.elements.empty());
  CHECK(doc.width == 10);
  CHECK(doc.height == 10);
}

TEST_CASE("viewBox provides the viewport") {
  SvgDocument doc = parse_svg("<svg viewBox=\"0 0 500 400\"><path d=\"M0 0 L10 0\"/></svg>");
  CHECK(doc.width == 500);
  CHECK(doc.height == 400);
  REQUIRE(doc.elements.size() == 1);
  CHECK(doc.elements[0].kind == ElemKind::Path);
}

TEST_CASE("missing viewport raises") {
  CHECK_THROWS_AS(parse_svg("<svg><rect width=\"3\" height=\"4\"/></svg>"), Error);
  try {
    parse_svg("<svg></svg>");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingViewport);
  }
}

TEST_CASE("malformed xml raises") {
  CHECK_THROWS_AS(parse_svg("<svg width=\"1\" height=\"1\"><rect"), Error);
  CHECK_THROWS_AS(parse_svg("<svg width=\"1\" height=\"1\"><g></svg>"), Error);
  CHECK_THROWS_AS(parse_svg("plain text"), Error);
}

TEST_CASE("group transforms apply to geometry") {
  SvgDocument doc = parse_svg(
      "<svg width=\"100\" height=\"100\">"
      "<g transform=\"translate(10, 20) scale(2)\"><rect x=\"1\" y=\"1\" width=\"3\" "
      "height=\"4\"/></g></svg>");
  REQUIRE(doc.elements.size() == 1);
  Rect r = doc.elements[0].rect;
  CHECK(r.x == doctest::Approx(12));
  CHECK(r.y == doctest::Approx(22));
  CHECK(r.w == doctest::Approx(6));
  CHECK(r.h == doctest::Approx(8));
}

TEST_CASE("rotate and skew transforms are rejected") {
  CHECK_THROWS_AS(
      parse_svg("<svg width=\"1\" height=\"1\"><g transform=\"rotate(45)\"><rect width=\"1\" "
                "height=\"1\"/></g></svg>"),
      Error);
  CHECK_THROWS_AS(
      parse_svg("<svg width=\"1\" height=\"1\"><rect transform=\"matrix(1,1,0,1,0,0)\" "
                "width=\"1\" height=\"1\"/></svg>"),
      Error);
}

TEST_CASE("defs subtree excluded from elements, text content collected") {
  SvgDocument doc = parse_svg(
      "<svg width=\"50\" height=\"50\">"
      "<defs><rect width=\"5\" height=\"5\"/></defs>"
      "<text x=\"10\" y=\"20\" font-size=\"10\">Hello &amp; bye</text></svg>");
  REQUIRE(doc.elements.size() == 1);
  CHECK(doc.elements[0].kind == ElemKind::Text);
  CHECK(doc.elements[0].text.content == "Hello & bye");
}

TEST_CASE("path data: literal, relative and arc commands") {
  PathData p = parse_path_data("M0 0 L10 0 Z");
  REQUIRE(p.subpaths.size() == 1);
  REQUIRE(p.subpaths[0].segments.size() == 3);
  CHECK(p.subpaths[0].segments[0].kind == SegKind::MoveTo);
  CHECK(p.subpaths[0].segments[1].kind == SegKind::LineTo);
  CHECK(p.subpaths[0].segments[1].to.x == 10);
  CHECK(p.subpaths[0].segments[2].kind == SegKind::ClosePath);

  p = parse_path_data("m5 5 l5 0");
  CHECK(p.subpaths[0].segments[0].to.x == 5);
  CHECK(p.subpaths[0].segments[1].to.x == 10);
  CHECK(p.subpaths[0].segments[1].to.y == 5);

  p = parse_path_data("M0 0 A50 50 0 0 1 100 0");
  REQUIRE(p.subpaths[0].segments.size() == 2);
  const Segment& arc = p.subpaths[0].segments[1];
  CHECK(arc.kind == SegKind::ArcTo);
  CHECK(arc.rx == 50);
  CHECK(arc.ry == 50);
  CHECK_FALSE(arc.large_arc);
  CHECK(arc.sweep);
  CHECK(arc.to.x == 100);
}

TEST_CASE("path data: implicit repetition, smooth curves, errors") {
  PathData p = parse_path_data("M0 0 10 10 20 20");
  CHECK(p.subpaths[0].segments.size() == 3);  // M + two implicit L
  p = parse_path_data("M0 0 C0 10 10 10 10 0 S20 -10 20 0");
  CHECK(p.subpaths[0].segments.size() == 3);
  // reflected control point of S: 2*cur - prev_c2 = (10, -10)
  CHECK(p.subpaths[0].segments[2].c1.x == doctest::Approx(10));
  CHECK(p.subpaths[0].segments[2].c1.y == doctest::Approx(-10));

  CHECK_THROWS_AS(parse_path_data("M0 0 X9"), Error);
  CHECK_THROWS_AS(parse_path_data("M0 0 L1"), Error);
  CHECK_THROWS_AS(parse_path_data("L0 0"), Error);
  try {
    parse_path_data("M0 0 X9");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::PathSyntax);
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("element bbox: rect identity and polyline min/max") {
  SvgElement e;
  e.kind = ElemKind::Rect;
  e.rect = {1, 2, 3, 4};
  CHECK(element_bbox(e) == Rect{1, 2, 3, 4});

  SvgElement p;
  p.kind = ElemKind::Path;
  p.path = parse_path_data("M0 0 L10 0 L10 5");
  Rect b = element_bbox(p);
  CHECK(b == Rect{0, 0, 10, 5});
}

TEST_CASE("cubic bbox from adaptive flattening vs dense sampling") {
  SvgElement p;
  p.kind = ElemKind::Path;
  p.path = parse_path_data("M0 0 C0 10 10 10 10 0");
  Rect b = element_bbox(p);
  // dense-sample oracle: 10k points of the cubic
  double max_y = 0;
  for (int i = 0; i <= 10000; ++i) {
    double t = i / 10000.0;
    double u = 1 - t;
    double y = 3 * u * u * t * 10 + 3 * u * t * t * 10;
    max_y = std::max(max_y, y);
  }
  CHECK(max_y == doctest::Approx(7.5).epsilon(1e-6));
  CHECK(b.x == doctest::Approx(0).epsilon(0.01));
  CHECK(b.w == doctest::Approx(10).epsilon(0.01));
  CHECK(b.y == doctest::Approx(0).scale(1).epsilon(0.1));
  CHECK(b.h == doctest::Approx(7.5).epsilon(0.02));
  CHECK_THROWS_AS(element_bbox(SvgElement{}), Error);  // path with no segments
}

TEST_CASE("arc length: line, semicircle, full circle, empty") {
  CHECK(path_arc_length(parse_path_data("M0 0 L10 0")) == doctest::Approx(10.0));

  double semi = path_arc_length(parse_path_data("M0 0 A50 50 0 0 1 100 0"));
  CHECK(semi == doctest::Approx(M_PI * 50).epsilon(1e-4));
  CHECK(std::fabs(semi - 157.0796) < 0.01);

  double full = path_arc_length(parse_path_data("M0 0 A50 50 0 1 1 100 0 A50 50 0 1 1 0 0"));
  CHECK(full == doctest::Approx(2 * M_PI * 50).epsilon(1e-3));

  CHECK(path_arc_length(PathData{}) == 0.0);
}

TEST_CASE("arc length matches the elliptic-integral value for a full ellipse") {
  // rx=60 ry=30 drawn as two half arcs; circumference 4*a*E(m) = 290.653447
  // (frozen from quadrature)
  PathData p = parse_path_data("M0 0 A60 30 0 1 1 120 0 A60 30 0 1 1 0 0");
  CHECK(path_arc_length(p) == doctest::Approx(290.65344661643).epsilon(1e-4));
}

TEST_CASE("colors: hex, keywords, rgb(), none, errors") {
  Rgb red = *parse_color("#ff0000");
  CHECK(red == Rgb{1, 0, 0});
  CHECK_FALSE(parse_color("none").has_value());
  Rgb mix = *parse_color("rgb(0, 128, 255)");
  CHECK(mix.r == doctest::Approx(0));
  CHECK(mix.g == doctest::Approx(0.50196).epsilon(1e-4));
  CHECK(mix.b == doctest::Approx(1));
  CHECK(parse_color("teal").has_value());
  CHECK(parse_color("#abc").has_value());
  CHECK_THROWS_AS(parse_color("blurple"), Error);
  CHECK_THROWS_AS(parse_color("#12345"), Error);
}

TEST_CASE("arc length is additive over subpaths and translation invariant") {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    double x0 = rng.uniform(-50, 50), y0 = rng.uniform(-50, 50);
    double x1 = rng.uniform(-50, 50), y1 = rng.uniform(-50, 50);
    std::string d1 = "M" + std::to_string(x0) + " " + std::to_string(y0) + " C" +
                     std::to_string(x1) + " " + std::to_string(y1) + " 10 10 20 0";
    std::string d2 = "M5 5 L25 7 L3 9";
    double separate = path_arc_length(parse_path_data(d1)) + path_arc_length(parse_path_data(d2));
    double joint = path_arc_length(parse_path_data(d1 + " " + d2));
    CHECK(joint == doctest::Approx(separate).epsilon(1e-9));

    // translate all control points by a constant
    double dx = rng.uniform(-100, 100), dy = rng.uniform(-100, 100);
    PathData p = parse_path_data(d1);
    for (auto& sp : p.subpaths)
      for (auto& s : sp.segments) {
        s.to.x += dx; s.to.y += dy;
        s.c1.x += dx; s.c1.y += dy;
        s.c2.x += dx; s.c2.y += dy;
      }
    CHECK(path_arc_length(p) == doctest::Approx(path_arc_length(parse_path_data(d1))).epsilon(1e-7));
  }
}

TEST_CASE("bbox contains every flattened point (random paths)") {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    std::string d = "M" + std::to_string(rng.uniform(-20, 20)) + " " +
                    std::to_string(rng.uniform(-20, 20));
    int segs = int(rng.uniform_int(1, 5));
    for (int s = 0; s < segs; ++s) {
      int kind = int(rng.uniform_int(0, 2));
      auto num = [&] { return std::to_string(rng.uniform(-30, 30)); };
      if (kind == 0) d += " L" + num() + " " + num();
      else if (kind == 1) d += " C" + num() + " " + num() + " " + num() + " " + num() + " " + num() + " " + num();
      else d += " Q" + num() + " " + num() + " " + num() + " " + num();
    }
    SvgElement e;
    e.kind = ElemKind::Path;
    e.path = parse_path_data(d);
    Rect b = element_bbox(e);
    for (const auto& poly : flatten_element(e, 0.01))
      for (const Point& pt : poly) {
        CHECK(pt.x >= b.x - 0.11);
        CHECK(pt.x <= b.x + b.w + 0.11);
        CHECK(pt.y >= b.y - 0.11);
        CHECK(pt.y <= b.y + b.h + 0.11);
      }
  }
}

TEST_CASE("raw text is retained byte-identical") {
  std::string text = "<svg width=\"10\" height=\"10\"><rect width=\"1\" height=\"1\"/></svg>";
  CHECK(parse_svg(text).raw == text);
}
