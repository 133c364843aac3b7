#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace chartrevive::svg {

struct Point {
  double x = 0;
  double y = 0;
};

struct Rect {
  double x = 0, y = 0, w = 0, h = 0;

  double area() const { return w * h; }
  double cx() const { return x + w / 2; }
  double cy() const { return y + h / 2; }
  bool operator==(const Rect&) const = default;
};

struct Rgb {
  double r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

enum class SegKind { MoveTo, LineTo, CubicTo, QuadTo, ArcTo, ClosePath };

struct Segment {
  SegKind kind = SegKind::MoveTo;
  Point to;              // endpoint (MoveTo/LineTo/CubicTo/QuadTo/ArcTo)
  Point c1, c2;          // CubicTo control points; QuadTo uses c1 only
  double rx = 0, ry = 0; // ArcTo radii
  double rotation = 0;   // ArcTo x-axis rotation, degrees
  bool large_arc = false;
  bool sweep = false;
};

// One subpath per MoveTo; all coordinates absolute after parsing.
struct Subpath {
  std::vector<Segment> segments;
  bool closed = false;

  Point start() const { return segments.front().to; }
};

struct PathData {
  std::vector<Subpath> subpaths;
};

enum class ElemKind { Path, Line, Rect, Circle, Ellipse, Polyline, Polygon, Text };
inline constexpr int kElemKindCount = 8;
const char* elem_kind_name(ElemKind k);

struct TextGeom {
  Point anchor;
  std::string content;
  double font_size = 16;
  enum class Anchor { Start, Middle, End } text_anchor = Anchor::Start;
};

struct SvgElement {
  int index = 0;
  ElemKind kind = ElemKind::Path;

  // Kind-specific geometry, with group transforms already applied.
  PathData path;                    // Path
  Point p1, p2;                     // Line
  Rect rect;                        // Rect
  Point center;                     // Circle / Ellipse
  double rx = 0, ry = 0;            // Circle (rx == ry) / Ellipse
  std::vector<Point> points;        // Polyline / Polygon
  TextGeom text;                    // Text

  std::optional<Rgb> fill;
  std::optional<Rgb> stroke;
  double stroke_width = 0;
  std::optional<std::string> id_attr;
  std::optional<std::string> class_attr;

  // Byte offset in the raw document just past the tag name of this element's
  // start tag. Labeled re-emission inserts attributes here.
  size_t tag_name_end = 0;
  bool has_class_attr = false, has_id_attr = false, has_acdata_attr = false;
};

struct SvgDocument {
  double width = 0;
  double height = 0;
  std::vector<SvgElement> elements;
  std::string raw;
};

SvgDocument parse_svg(const std::string& text);
PathData parse_path_data(const std::string& d);
Rect element_bbox(const SvgElement& e);
double path_arc_length(const PathData& p);
std::optional<Rgb> parse_color(const std::string& s);

Rect bbox_of_points(const std::vector<Point>& pts);

// Flattens one element's geometry to polylines (one per subpath; text yields
// its estimated bbox outline). Used by bbox, graph construction and tests.
std::vector<std::vector<Point>> flatten_element(const SvgElement& e, double tol = 0.1);

// Arc length of a single segment starting at `from`.
double segment_length(const Point& from, const Segment& s, double rel_tol = 1e-4);

// Text bbox estimate: 0.6 * font_size per character wide, 1.2 * font_size
// tall, honoring text-anchor. No font engine involved.
Rect text_bbox(const TextGeom& t);

}  // namespace chartrevive::svg
