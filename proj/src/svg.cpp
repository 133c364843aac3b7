#include "chartrevive/svg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "chartrevive/error.hpp"

namespace chartrevive::svg {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool is_number_start(char c) { return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.'; }

// --- transforms -------------------------------------------------------------
// Axis-aligned affine map: (x, y) -> (a*x + e, d*y + f). Rotation and skew
// are rejected at parse time, so two coefficients suffice.
struct Xf {
  double a = 1, d = 1, e = 0, f = 0;

  Point apply(Point p) const { return {a * p.x + e, d * p.y + f}; }
  double scale_x() const { return std::fabs(a); }
  double scale_y() const { return std::fabs(d); }
};

Xf compose(const Xf& outer, const Xf& inner) {
  Xf r;
  r.a = outer.a * inner.a;
  r.d = outer.d * inner.d;
  r.e = outer.a * inner.e + outer.e;
  r.f = outer.d * inner.f + outer.f;
  return r;
}

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  const char* p = s.c_str();
  const char* end = p + s.size();
  while (p < end) {
    while (p < end && (is_space(*p) || *p == ',')) ++p;
    if (p >= end) break;
    char* stop = nullptr;
    double v = std::strtod(p, &stop);
    if (stop == p) break;
    out.push_back(v);
    p = stop;
  }
  return out;
}

Xf parse_transform(const std::string& s) {
  Xf xf;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (is_space(s[i]) || s[i] == ',')) ++i;
    if (i >= s.size()) break;
    size_t name_start = i;
    while (i < s.size() && (std::isalpha(uint8_t(s[i])) || s[i] == '-')) ++i;
    std::string name = s.substr(name_start, i - name_start);
    while (i < s.size() && is_space(s[i])) ++i;
    if (i >= s.size() || s[i] != '(')
      raise(Errc::UnsupportedTransform, "bad transform syntax: " + s);
    size_t close = s.find(')', i);
    if (close == std::string::npos)
      raise(Errc::UnsupportedTransform, "unterminated transform: " + s);
    std::vector<double> args = parse_number_list(s.substr(i + 1, close - i - 1));
    i = close + 1;

    Xf step;
    if (name == "translate") {
      if (args.empty()) raise(Errc::UnsupportedTransform, "translate needs arguments");
      step.e = args[0];
      step.f = args.size() > 1 ? args[1] : 0;
    } else if (name == "scale") {
      if (args.empty()) raise(Errc::UnsupportedTransform, "scale needs arguments");
      step.a = args[0];
      step.d = args.size() > 1 ? args[1] : args[0];
    } else if (name == "matrix") {
      if (args.size() != 6) raise(Errc::UnsupportedTransform, "matrix needs 6 arguments");
      if (args[1] != 0 || args[2] != 0)
        raise(Errc::UnsupportedTransform, "matrix with rotation/skew components: " + s);
      step.a = args[0];
      step.d = args[3];
      step.e = args[4];
      step.f = args[5];
    } else {
      raise(Errc::UnsupportedTransform, "transform '" + name + "' not supported");
    }
    xf = compose(xf, step);
  }
  return xf;
}

// --- xml scanning ------------------------------------------------------------

struct Attr {
  std::string name;
  std::string value;
};

struct Tag {
  std::string name;
  std::vector<Attr> attrs;
  bool closing = false;      // </name>
  bool self_closing = false; // <name/>
  size_t name_end = 0;       // byte offset just past the tag name
};

std::string unescape_entities(const std::string& s) {
  if (s.find('&') == std::string::npos) return s;
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    size_t semi = s.find(';', i);
    if (semi == std::string::npos || semi - i > 10) {
      out += s[i++];
      continue;
    }
    std::string ent = s.substr(i + 1, semi - i - 1);
    if (ent == "amp") out += '&';
    else if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (!ent.empty() && ent[0] == '#') {
      long code = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                      ? std::strtol(ent.c_str() + 2, nullptr, 16)
                      : std::strtol(ent.c_str() + 1, nullptr, 10);
      if (code > 0 && code < 128) out += char(code);
      // non-ASCII references are dropped; charts in scope are ASCII
    } else {
      out += s.substr(i, semi - i + 1);
      i = semi + 1;
      continue;
    }
    i = semi + 1;
  }
  return out;
}

class XmlScanner {
public:
  explicit XmlScanner(const std::string& text) : s_(text) {}

  // Advances to the next tag; character data between tags is appended to
  // `text_out`. Returns false at end of input.
  bool next(Tag& tag, std::string& text_out) {
    while (pos_ < s_.size()) {
      size_t lt = s_.find('<', pos_);
      if (lt == std::string::npos) {
        text_out.append(s_, pos_, s_.size() - pos_);
        pos_ = s_.size();
        return false;
      }
      text_out.append(s_, pos_, lt - pos_);
      pos_ = lt;
      if (match("<!--")) {
        size_t end = s_.find("-->", pos_);
        if (end == std::string::npos) raise(Errc::MalformedXml, "unterminated comment");
        pos_ = end + 3;
        continue;
      }
      if (match("<![CDATA[")) {
        size_t end = s_.find("]]>", pos_);
        if (end == std::string::npos) raise(Errc::MalformedXml, "unterminated CDATA");
        text_out.append(s_, pos_, end - pos_);
        pos_ = end + 3;
        continue;
      }
      if (match("<?") || match("<!")) {
        size_t end = s_.find('>', pos_);
        if (end == std::string::npos) raise(Errc::MalformedXml, "unterminated declaration");
        pos_ = end + 1;
        continue;
      }
      return scan_tag(tag);
    }
    return false;
  }

private:
  bool match(const char* lit) {
    size_t n = std::strlen(lit);
    if (s_.compare(pos_, n, lit) == 0) {
      pos_ += n;
      return true;
    }
    return false;
  }

  bool scan_tag(Tag& tag) {
    tag = Tag{};
    ++pos_; // consume '<'
    if (pos_ < s_.size() && s_[pos_] == '/') {
      tag.closing = true;
      ++pos_;
    }
    size_t name_start = pos_;
    while (pos_ < s_.size() && !is_space(s_[pos_]) && s_[pos_] != '>' && s_[pos_] != '/')
      ++pos_;
    tag.name = s_.substr(name_start, pos_ - name_start);
    tag.name_end = pos_;
    if (tag.name.empty()) raise(Errc::MalformedXml, "empty tag name at byte " + std::to_string(name_start));

    while (true) {
      while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
      if (pos_ >= s_.size()) raise(Errc::MalformedXml, "unterminated tag <" + tag.name);
      if (s_[pos_] == '>') {
        ++pos_;
        return true;
      }
      if (s_[pos_] == '/') {
        ++pos_;
        if (pos_ >= s_.size() || s_[pos_] != '>')
          raise(Errc::MalformedXml, "malformed self-closing tag <" + tag.name);
        ++pos_;
        tag.self_closing = true;
        return true;
      }
      Attr a;
      size_t astart = pos_;
      while (pos_ < s_.size() && s_[pos_] != '=' && !is_space(s_[pos_]) && s_[pos_] != '>')
        ++pos_;
      a.name = s_.substr(astart, pos_ - astart);
      while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
      if (pos_ >= s_.size() || s_[pos_] != '=')
        raise(Errc::MalformedXml, "attribute '" + a.name + "' missing value in <" + tag.name);
      ++pos_;
      while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
      if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\''))
        raise(Errc::MalformedXml, "unquoted attribute value in <" + tag.name);
      char quote = s_[pos_++];
      size_t vstart = pos_;
      size_t vend = s_.find(quote, vstart);
      if (vend == std::string::npos)
        raise(Errc::MalformedXml, "unterminated attribute value in <" + tag.name);
      a.value = unescape_entities(s_.substr(vstart, vend - vstart));
      pos_ = vend + 1;
      tag.attrs.push_back(std::move(a));
    }
  }

  const std::string& s_;
  size_t pos_ = 0;
};

const std::string* find_attr(const Tag& tag, const char* name) {
  for (const auto& a : tag.attrs)
    if (a.name == name) return &a.value;
  return nullptr;
}

double attr_number(const Tag& tag, const char* name, double dflt) {
  const std::string* v = find_attr(tag, name);
  if (!v) return dflt;
  return std::strtod(v->c_str(), nullptr);
}

// Inheritable presentation attributes, carried down through groups.
struct Style {
  std::optional<std::string> fill, stroke, stroke_width, font_size, text_anchor;

  void absorb(const Tag& tag) {
    if (const std::string* v = find_attr(tag, "fill")) fill = *v;
    if (const std::string* v = find_attr(tag, "stroke")) stroke = *v;
    if (const std::string* v = find_attr(tag, "stroke-width")) stroke_width = *v;
    if (const std::string* v = find_attr(tag, "font-size")) font_size = *v;
    if (const std::string* v = find_attr(tag, "text-anchor")) text_anchor = *v;
  }
};

bool subtree_skipped(const std::string& name) {
  static const char* kSkip[] = {"defs",    "symbol", "clipPath", "mask",  "marker",
                                "pattern", "style",  "metadata", "title", "desc",
                                "filter",  "linearGradient", "radialGradient", "script"};
  for (const char* n : kSkip)
    if (name == n) return true;
  return false;
}

}  // namespace

const char* elem_kind_name(ElemKind k) {
  switch (k) {
    case ElemKind::Path: return "path";
    case ElemKind::Line: return "line";
    case ElemKind::Rect: return "rect";
    case ElemKind::Circle: return "circle";
    case ElemKind::Ellipse: return "ellipse";
    case ElemKind::Polyline: return "polyline";
    case ElemKind::Polygon: return "polygon";
    case ElemKind::Text: return "text";
  }
  return "?";
}

// --- colors ------------------------------------------------------------------

std::optional<Rgb> parse_color(const std::string& s) {
  // CSS basic color keywords (the 16-name set).
  struct Named { const char* name; int r, g, b; };
  static const Named kBasic[] = {
      {"black", 0, 0, 0},       {"silver", 192, 192, 192}, {"gray", 128, 128, 128},
      {"white", 255, 255, 255}, {"maroon", 128, 0, 0},     {"red", 255, 0, 0},
      {"purple", 128, 0, 128},  {"fuchsia", 255, 0, 255},  {"green", 0, 128, 0},
      {"lime", 0, 255, 0},      {"olive", 128, 128, 0},    {"yellow", 255, 255, 0},
      {"navy", 0, 0, 128},      {"blue", 0, 0, 255},       {"teal", 0, 128, 128},
      {"aqua", 0, 255, 255},
  };

  std::string t;
  for (char c : s)
    if (!is_space(c)) t += char(std::tolower(uint8_t(c)));
  if (t.empty() || t == "none" || t == "transparent") return std::nullopt;

  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };

  if (t[0] == '#') {
    if (t.size() == 4) {
      int r = hex(t[1]), g = hex(t[2]), b = hex(t[3]);
      if (r < 0 || g < 0 || b < 0) raise(Errc::ColorSyntax, "bad hex color: " + s);
      return Rgb{(r * 17) / 255.0, (g * 17) / 255.0, (b * 17) / 255.0};
    }
    if (t.size() == 7) {
      int v[6];
      for (int i = 0; i < 6; ++i) {
        v[i] = hex(t[1 + i]);
        if (v[i] < 0) raise(Errc::ColorSyntax, "bad hex color: " + s);
      }
      return Rgb{(v[0] * 16 + v[1]) / 255.0, (v[2] * 16 + v[3]) / 255.0, (v[4] * 16 + v[5]) / 255.0};
    }
    raise(Errc::ColorSyntax, "bad hex color: " + s);
  }

  if (t.rfind("rgb(", 0) == 0 && t.back() == ')') {
    std::vector<double> nums = parse_number_list(t.substr(4, t.size() - 5));
    if (nums.size() != 3) raise(Errc::ColorSyntax, "rgb() needs 3 components: " + s);
    for (double& v : nums) v = std::clamp(v, 0.0, 255.0);
    return Rgb{nums[0] / 255.0, nums[1] / 255.0, nums[2] / 255.0};
  }

  for (const Named& n : kBasic)
    if (t == n.name) return Rgb{n.r / 255.0, n.g / 255.0, n.b / 255.0};

  raise(Errc::ColorSyntax, "unrecognized color: " + s);
}

// --- path data ---------------------------------------------------------------

namespace {

class PathLexer {
public:
  explicit PathLexer(const std::string& d) : s_(d) {}

  bool eof() {
    skip_separators();
    return pos_ >= s_.size();
  }

  size_t offset() const { return pos_; }

  char peek_command() {
    skip_separators();
    if (pos_ >= s_.size()) return 0;
    char c = s_[pos_];
    return std::isalpha(uint8_t(c)) ? c : 0;
  }

  char take_command() {
    char c = peek_command();
    if (c) ++pos_;
    return c;
  }

  double number() {
    skip_separators();
    if (pos_ >= s_.size() || !is_number_start(s_[pos_]))
      raise(Errc::PathSyntax, "expected number at byte " + std::to_string(pos_));
    const char* start = s_.c_str() + pos_;
    char* stop = nullptr;
    double v = std::strtod(start, &stop);
    if (stop == start) raise(Errc::PathSyntax, "bad number at byte " + std::to_string(pos_));
    pos_ += size_t(stop - start);
    return v;
  }

  bool flag() {
    skip_separators();
    if (pos_ >= s_.size() || (s_[pos_] != '0' && s_[pos_] != '1'))
      raise(Errc::PathSyntax, "expected arc flag at byte " + std::to_string(pos_));
    return s_[pos_++] == '1';
  }

private:
  void skip_separators() {
    while (pos_ < s_.size() && (is_space(s_[pos_]) || s_[pos_] == ',')) ++pos_;
  }

  const std::string& s_;
  size_t pos_ = 0;
};

}  // namespace

PathData parse_path_data(const std::string& d) {
  PathData out;
  PathLexer lex(d);

  Point cur{0, 0};
  Point subpath_start{0, 0};
  Point prev_cubic_c2{0, 0}, prev_quad_c1{0, 0};
  char prev_cmd = 0;
  Subpath* sp = nullptr;

  auto require_subpath = [&]() -> Subpath& {
    if (!sp) raise(Errc::PathSyntax, "path data must begin with a moveto");
    return *sp;
  };

  while (!lex.eof()) {
    char cmd = lex.take_command();
    if (!cmd) {
      // implicit command repetition
      if (!prev_cmd) raise(Errc::PathSyntax, "leading coordinates without command at byte " +
                                                 std::to_string(lex.offset()));
      cmd = prev_cmd;
      if (cmd == 'M') cmd = 'L';
      if (cmd == 'm') cmd = 'l';
    }
    bool rel = std::islower(uint8_t(cmd));
    char op = char(std::toupper(uint8_t(cmd)));

    switch (op) {
      case 'M': {
        double x = lex.number(), y = lex.number();
        if (rel) { x += cur.x; y += cur.y; }
        out.subpaths.emplace_back();
        sp = &out.subpaths.back();
        Segment seg;
        seg.kind = SegKind::MoveTo;
        seg.to = {x, y};
        sp->segments.push_back(seg);
        cur = subpath_start = {x, y};
        break;
      }
      case 'L': case 'H': case 'V': {
        double x = cur.x, y = cur.y;
        if (op == 'L') { x = lex.number(); y = lex.number(); if (rel) { x += cur.x; y += cur.y; } }
        else if (op == 'H') { x = lex.number(); if (rel) x += cur.x; }
        else { y = lex.number(); if (rel) y += cur.y; }
        Segment seg;
        seg.kind = SegKind::LineTo;
        seg.to = {x, y};
        require_subpath().segments.push_back(seg);
        cur = {x, y};
        break;
      }
      case 'C': case 'S': {
        Segment seg;
        seg.kind = SegKind::CubicTo;
        if (op == 'C') {
          seg.c1 = {lex.number(), lex.number()};
          if (rel) { seg.c1.x += cur.x; seg.c1.y += cur.y; }
        } else {
          bool reflect = prev_cmd && (std::toupper(uint8_t(prev_cmd)) == 'C' ||
                                      std::toupper(uint8_t(prev_cmd)) == 'S');
          seg.c1 = reflect ? Point{2 * cur.x - prev_cubic_c2.x, 2 * cur.y - prev_cubic_c2.y} : cur;
        }
        seg.c2 = {lex.number(), lex.number()};
        seg.to = {lex.number(), lex.number()};
        if (rel) { seg.c2.x += cur.x; seg.c2.y += cur.y; seg.to.x += cur.x; seg.to.y += cur.y; }
        require_subpath().segments.push_back(seg);
        prev_cubic_c2 = seg.c2;
        cur = seg.to;
        break;
      }
      case 'Q': case 'T': {
        Segment seg;
        seg.kind = SegKind::QuadTo;
        if (op == 'Q') {
          seg.c1 = {lex.number(), lex.number()};
          if (rel) { seg.c1.x += cur.x; seg.c1.y += cur.y; }
        } else {
          bool reflect = prev_cmd && (std::toupper(uint8_t(prev_cmd)) == 'Q' ||
                                      std::toupper(uint8_t(prev_cmd)) == 'T');
          seg.c1 = reflect ? Point{2 * cur.x - prev_quad_c1.x, 2 * cur.y - prev_quad_c1.y} : cur;
        }
        seg.to = {lex.number(), lex.number()};
        if (rel) { seg.to.x += cur.x; seg.to.y += cur.y; }
        require_subpath().segments.push_back(seg);
        prev_quad_c1 = seg.c1;
        cur = seg.to;
        break;
      }
      case 'A': {
        Segment seg;
        seg.kind = SegKind::ArcTo;
        seg.rx = std::fabs(lex.number());
        seg.ry = std::fabs(lex.number());
        seg.rotation = lex.number();
        seg.large_arc = lex.flag();
        seg.sweep = lex.flag();
        seg.to = {lex.number(), lex.number()};
        if (rel) { seg.to.x += cur.x; seg.to.y += cur.y; }
        require_subpath().segments.push_back(seg);
        cur = seg.to;
        break;
      }
      case 'Z': {
        Segment seg;
        seg.kind = SegKind::ClosePath;
        seg.to = subpath_start;
        require_subpath().segments.push_back(seg);
        require_subpath().closed = true;
        cur = subpath_start;
        break;
      }
      default:
        raise(Errc::PathSyntax, std::string("unknown command '") + cmd + "' at byte " +
                                    std::to_string(lex.offset() - 1));
    }
    prev_cmd = cmd;
  }
  return out;
}

// --- geometry ----------------------------------------------------------------

namespace {

Point cubic_at(Point p0, const Segment& s, double t) {
  double u = 1 - t;
  double b0 = u * u * u, b1 = 3 * u * u * t, b2 = 3 * u * t * t, b3 = t * t * t;
  return {b0 * p0.x + b1 * s.c1.x + b2 * s.c2.x + b3 * s.to.x,
          b0 * p0.y + b1 * s.c1.y + b2 * s.c2.y + b3 * s.to.y};
}

Point quad_at(Point p0, const Segment& s, double t) {
  double u = 1 - t;
  double b0 = u * u, b1 = 2 * u * t, b2 = t * t;
  return {b0 * p0.x + b1 * s.c1.x + b2 * s.to.x, b0 * p0.y + b1 * s.c1.y + b2 * s.to.y};
}

// Endpoint-to-center conversion for elliptical arcs (SVG 1.1 appendix F.6.5).
struct ArcCenter {
  Point c;
  double rx, ry, phi;    // phi in radians
  double theta1, dtheta; // start angle and sweep, radians
  bool degenerate = false;
};

ArcCenter arc_center(Point p0, const Segment& s) {
  ArcCenter a;
  a.rx = s.rx;
  a.ry = s.ry;
  a.phi = s.rotation * kPi / 180.0;
  if (a.rx == 0 || a.ry == 0 || (p0.x == s.to.x && p0.y == s.to.y)) {
    a.degenerate = true;
    return a;
  }
  double cosp = std::cos(a.phi), sinp = std::sin(a.phi);
  double dx2 = (p0.x - s.to.x) / 2, dy2 = (p0.y - s.to.y) / 2;
  double x1 = cosp * dx2 + sinp * dy2;
  double y1 = -sinp * dx2 + cosp * dy2;

  double lambda = (x1 * x1) / (a.rx * a.rx) + (y1 * y1) / (a.ry * a.ry);
  if (lambda > 1) {
    double k = std::sqrt(lambda);
    a.rx *= k;
    a.ry *= k;
  }
  double rx2 = a.rx * a.rx, ry2 = a.ry * a.ry;
  double num = rx2 * ry2 - rx2 * y1 * y1 - ry2 * x1 * x1;
  double den = rx2 * y1 * y1 + ry2 * x1 * x1;
  double co = std::sqrt(std::max(0.0, num / den));
  if (s.large_arc == s.sweep) co = -co;
  double cx1 = co * a.rx * y1 / a.ry;
  double cy1 = -co * a.ry * x1 / a.rx;
  a.c = {cosp * cx1 - sinp * cy1 + (p0.x + s.to.x) / 2,
         sinp * cx1 + cosp * cy1 + (p0.y + s.to.y) / 2};

  auto angle = [](double ux, double uy, double vx, double vy) {
    double dot = ux * vx + uy * vy;
    double len = std::sqrt((ux * ux + uy * uy) * (vx * vx + vy * vy));
    double ang = std::acos(std::clamp(dot / len, -1.0, 1.0));
    return (ux * vy - uy * vx < 0) ? -ang : ang;
  };
  a.theta1 = angle(1, 0, (x1 - cx1) / a.rx, (y1 - cy1) / a.ry);
  a.dtheta = angle((x1 - cx1) / a.rx, (y1 - cy1) / a.ry, (-x1 - cx1) / a.rx, (-y1 - cy1) / a.ry);
  if (!s.sweep && a.dtheta > 0) a.dtheta -= 2 * kPi;
  if (s.sweep && a.dtheta < 0) a.dtheta += 2 * kPi;
  return a;
}

Point arc_at(const ArcCenter& a, double t) {
  double th = a.theta1 + t * a.dtheta;
  double cosp = std::cos(a.phi), sinp = std::sin(a.phi);
  double x = a.rx * std::cos(th), y = a.ry * std::sin(th);
  return {a.c.x + cosp * x - sinp * y, a.c.y + sinp * x + cosp * y};
}

// Adaptive chord-doubling length with one Richardson correction term.
template <typename F>
double adaptive_length(const F& at, double t0, double t1, double rel_tol, int depth) {
  Point a = at(t0), b = at(t1), m = at((t0 + t1) / 2);
  double chord = std::hypot(b.x - a.x, b.y - a.y);
  double split = std::hypot(m.x - a.x, m.y - a.y) + std::hypot(b.x - m.x, b.y - m.y);
  if (depth >= 24 || split - chord <= rel_tol * split || split < 1e-12)
    return split + (split - chord) / 3;
  return adaptive_length(at, t0, (t0 + t1) / 2, rel_tol / 2, depth + 1) +
         adaptive_length(at, (t0 + t1) / 2, t1, rel_tol / 2, depth + 1);
}

template <typename F>
void adaptive_flatten(const F& at, double t0, double t1, double tol, int depth,
                      std::vector<Point>& out) {
  Point a = at(t0), b = at(t1), m = at((t0 + t1) / 2);
  // distance of the parametric midpoint from the chord
  double vx = b.x - a.x, vy = b.y - a.y;
  double len = std::hypot(vx, vy);
  double dist;
  if (len < 1e-12) {
    dist = std::hypot(m.x - a.x, m.y - a.y);
  } else {
    dist = std::fabs(vx * (m.y - a.y) - vy * (m.x - a.x)) / len;
  }
  if (depth >= 20 || dist <= tol) {
    out.push_back(b);
    return;
  }
  adaptive_flatten(at, t0, (t0 + t1) / 2, tol, depth + 1, out);
  adaptive_flatten(at, (t0 + t1) / 2, t1, tol, depth + 1, out);
}

void flatten_segment(Point from, const Segment& s, double tol, std::vector<Point>& out) {
  switch (s.kind) {
    case SegKind::MoveTo:
      out.push_back(s.to);
      break;
    case SegKind::LineTo:
    case SegKind::ClosePath:
      out.push_back(s.to);
      break;
    case SegKind::CubicTo:
      adaptive_flatten([&](double t) { return cubic_at(from, s, t); }, 0, 1, tol, 0, out);
      break;
    case SegKind::QuadTo:
      adaptive_flatten([&](double t) { return quad_at(from, s, t); }, 0, 1, tol, 0, out);
      break;
    case SegKind::ArcTo: {
      ArcCenter a = arc_center(from, s);
      if (a.degenerate) {
        out.push_back(s.to);
      } else {
        adaptive_flatten([&](double t) { return arc_at(a, t); }, 0, 1, tol, 0, out);
      }
      break;
    }
  }
}

}  // namespace

double segment_length(const Point& from, const Segment& s, double rel_tol) {
  switch (s.kind) {
    case SegKind::MoveTo:
      return 0;
    case SegKind::LineTo:
    case SegKind::ClosePath:
      return std::hypot(s.to.x - from.x, s.to.y - from.y);
    case SegKind::CubicTo:
      return adaptive_length([&](double t) { return cubic_at(from, s, t); }, 0, 1, rel_tol, 0);
    case SegKind::QuadTo:
      return adaptive_length([&](double t) { return quad_at(from, s, t); }, 0, 1, rel_tol, 0);
    case SegKind::ArcTo: {
      ArcCenter a = arc_center(from, s);
      if (a.degenerate) return std::hypot(s.to.x - from.x, s.to.y - from.y);
      return adaptive_length([&](double t) { return arc_at(a, t); }, 0, 1, rel_tol, 0);
    }
  }
  return 0;
}

double path_arc_length(const PathData& p) {
  double total = 0;
  for (const Subpath& sp : p.subpaths) {
    Point cur{0, 0};
    for (const Segment& s : sp.segments) {
      total += segment_length(cur, s, 1e-4);
      cur = s.to;
    }
  }
  return total;
}

Rect bbox_of_points(const std::vector<Point>& pts) {
  double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
  for (const Point& p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

Rect text_bbox(const TextGeom& t) {
  double w = 0.6 * t.font_size * double(t.content.size());
  double h = 1.2 * t.font_size;
  double x = t.anchor.x;
  if (t.text_anchor == TextGeom::Anchor::Middle) x -= w / 2;
  else if (t.text_anchor == TextGeom::Anchor::End) x -= w;
  // baseline sits 0.9 * font_size below the box top
  return {x, t.anchor.y - 0.9 * t.font_size, w, h};
}

std::vector<std::vector<Point>> flatten_element(const SvgElement& e, double tol) {
  std::vector<std::vector<Point>> out;
  switch (e.kind) {
    case ElemKind::Path: {
      if (e.path.subpaths.empty()) raise(Errc::EmptyGeometry, "path with no segments");
      for (const Subpath& sp : e.path.subpaths) {
        std::vector<Point> poly;
        Point cur = sp.start();
        for (const Segment& s : sp.segments) {
          if (s.kind == SegKind::MoveTo) poly.push_back(s.to);
          else flatten_segment(cur, s, tol, poly);
          cur = s.to;
        }
        out.push_back(std::move(poly));
      }
      break;
    }
    case ElemKind::Line:
      out.push_back({e.p1, e.p2});
      break;
    case ElemKind::Rect:
      out.push_back({{e.rect.x, e.rect.y},
                     {e.rect.x + e.rect.w, e.rect.y},
                     {e.rect.x + e.rect.w, e.rect.y + e.rect.h},
                     {e.rect.x, e.rect.y + e.rect.h},
                     {e.rect.x, e.rect.y}});
      break;
    case ElemKind::Circle:
    case ElemKind::Ellipse: {
      std::vector<Point> poly;
      int n = 64;
      for (int i = 0; i <= n; ++i) {
        double th = 2 * kPi * i / n;
        poly.push_back({e.center.x + e.rx * std::cos(th), e.center.y + e.ry * std::sin(th)});
      }
      out.push_back(std::move(poly));
      break;
    }
    case ElemKind::Polyline:
    case ElemKind::Polygon: {
      if (e.points.empty()) raise(Errc::EmptyGeometry, "poly element with no points");
      std::vector<Point> poly = e.points;
      if (e.kind == ElemKind::Polygon) poly.push_back(e.points.front());
      out.push_back(std::move(poly));
      break;
    }
    case ElemKind::Text: {
      Rect r = text_bbox(e.text);
      out.push_back({{r.x, r.y}, {r.x + r.w, r.y}, {r.x + r.w, r.y + r.h}, {r.x, r.y + r.h}});
      break;
    }
  }
  return out;
}

Rect element_bbox(const SvgElement& e) {
  switch (e.kind) {
    case ElemKind::Rect:
      return e.rect;
    case ElemKind::Text:
      return text_bbox(e.text);
    default: {
      std::vector<Point> all;
      for (auto& poly : flatten_element(e, 0.1))
        all.insert(all.end(), poly.begin(), poly.end());
      if (all.empty()) raise(Errc::EmptyGeometry, "element has no geometry");
      return bbox_of_points(all);
    }
  }
}

// --- document parsing ----------------------------------------------------------

namespace {

struct Frame {
  std::string tag;
  Xf xf;
  Style style;
  bool skipped = false;   // inside defs/clipPath/... subtree
  bool is_text = false;   // inside a <text> element
};

}  // namespace

SvgDocument parse_svg(const std::string& text) {
  SvgDocument doc;
  doc.raw = text;

  XmlScanner scan(text);
  std::vector<Frame> stack;
  Tag tag;
  std::string chars;
  bool seen_root = false;
  bool done_root = false;

  // Pending text element: geometry is finalized when its end tag arrives.
  SvgElement* open_text = nullptr;
  std::string text_content;

  while (true) {
    chars.clear();
    bool more = scan.next(tag, chars);
    if (open_text) text_content += chars;
    if (!more) break;

    if (tag.closing) {
      if (stack.empty() || stack.back().tag != tag.name)
        raise(Errc::MalformedXml, "mismatched closing tag </" + tag.name + ">");
      if (tag.name == "text" && open_text) {
        std::string t = unescape_entities(text_content);
        size_t b = t.find_first_not_of(" \t\r\n");
        size_t e = t.find_last_not_of(" \t\r\n");
        open_text->text.content = (b == std::string::npos) ? "" : t.substr(b, e - b + 1);
        open_text = nullptr;
      }
      stack.pop_back();
      if (stack.empty()) done_root = true;
      continue;
    }

    if (done_root) raise(Errc::MalformedXml, "content after root element");

    if (!seen_root) {
      if (tag.name != "svg") raise(Errc::MalformedXml, "root element is <" + tag.name + ">, not <svg>");
      seen_root = true;
      Xf root_xf;
      double w = attr_number(tag, "width", 0), h = attr_number(tag, "height", 0);
      if (const std::string* vb = find_attr(tag, "viewBox")) {
        std::vector<double> v = parse_number_list(*vb);
        if (v.size() == 4 && v[2] > 0 && v[3] > 0) {
          w = v[2];
          h = v[3];
          root_xf.e = -v[0];
          root_xf.f = -v[1];
        }
      }
      if (w <= 0 || h <= 0) raise(Errc::MissingViewport, "no usable width/height or viewBox");
      doc.width = w;
      doc.height = h;
      if (!tag.self_closing) {
        Frame fr;
        fr.tag = tag.name;
        fr.xf = root_xf;
        fr.style.absorb(tag);
        stack.push_back(fr);
      }
      continue;
    }

    if (stack.empty()) raise(Errc::MalformedXml, "element outside root");

    Frame fr;
    fr.tag = tag.name;
    fr.xf = stack.back().xf;
    fr.style = stack.back().style;
    fr.skipped = stack.back().skipped || subtree_skipped(tag.name);
    fr.is_text = stack.back().is_text;

    if (const std::string* t = find_attr(tag, "transform"))
      fr.xf = compose(fr.xf, parse_transform(*t));
    fr.style.absorb(tag);

    bool supported = !fr.skipped && !stack.back().is_text;
    const Xf& xf = fr.xf;

    SvgElement el;
    el.index = int(doc.elements.size());
    el.tag_name_end = tag.name_end;
    bool emit = false;

    if (supported) {
      if (tag.name == "path") {
        if (const std::string* d = find_attr(tag, "d")) {
          el.kind = ElemKind::Path;
          el.path = parse_path_data(*d);
          for (Subpath& sp : el.path.subpaths)
            for (Segment& s : sp.segments) {
              s.to = xf.apply(s.to);
              s.c1 = xf.apply(s.c1);
              s.c2 = xf.apply(s.c2);
              s.rx *= xf.scale_x();
              s.ry *= xf.scale_y();
            }
          emit = !el.path.subpaths.empty();
        }
      } else if (tag.name == "line") {
        el.kind = ElemKind::Line;
        el.p1 = xf.apply({attr_number(tag, "x1", 0), attr_number(tag, "y1", 0)});
        el.p2 = xf.apply({attr_number(tag, "x2", 0), attr_number(tag, "y2", 0)});
        emit = true;
      } else if (tag.name == "rect") {
        el.kind = ElemKind::Rect;
        Point a = xf.apply({attr_number(tag, "x", 0), attr_number(tag, "y", 0)});
        Point b = xf.apply({attr_number(tag, "x", 0) + attr_number(tag, "width", 0),
                            attr_number(tag, "y", 0) + attr_number(tag, "height", 0)});
        el.rect = {std::min(a.x, b.x), std::min(a.y, b.y), std::fabs(b.x - a.x), std::fabs(b.y - a.y)};
        emit = true;
      } else if (tag.name == "circle") {
        el.kind = ElemKind::Circle;
        el.center = xf.apply({attr_number(tag, "cx", 0), attr_number(tag, "cy", 0)});
        double r = attr_number(tag, "r", 0);
        el.rx = r * xf.scale_x();
        el.ry = r * xf.scale_y();
        emit = true;
      } else if (tag.name == "ellipse") {
        el.kind = ElemKind::Ellipse;
        el.center = xf.apply({attr_number(tag, "cx", 0), attr_number(tag, "cy", 0)});
        el.rx = attr_number(tag, "rx", 0) * xf.scale_x();
        el.ry = attr_number(tag, "ry", 0) * xf.scale_y();
        emit = true;
      } else if (tag.name == "polyline" || tag.name == "polygon") {
        el.kind = tag.name == "polyline" ? ElemKind::Polyline : ElemKind::Polygon;
        if (const std::string* pts = find_attr(tag, "points")) {
          std::vector<double> nums = parse_number_list(*pts);
          for (size_t i = 0; i + 1 < nums.size(); i += 2)
            el.points.push_back(xf.apply({nums[i], nums[i + 1]}));
        }
        emit = !el.points.empty();
      } else if (tag.name == "text") {
        el.kind = ElemKind::Text;
        el.text.anchor = xf.apply({attr_number(tag, "x", 0), attr_number(tag, "y", 0)});
        double fs = 16;
        if (const std::string* v = find_attr(tag, "font-size")) fs = std::strtod(v->c_str(), nullptr);
        else if (fr.style.font_size) fs = std::strtod(fr.style.font_size->c_str(), nullptr);
        el.text.font_size = fs * xf.scale_y();
        std::string anchor = fr.style.text_anchor.value_or("start");
        el.text.text_anchor = anchor == "middle" ? TextGeom::Anchor::Middle
                              : anchor == "end"  ? TextGeom::Anchor::End
                                                 : TextGeom::Anchor::Start;
        emit = true;
      }
    }

    if (emit) {
      el.fill = fr.style.fill ? parse_color(*fr.style.fill) : std::nullopt;
      el.stroke = fr.style.stroke ? parse_color(*fr.style.stroke) : std::nullopt;
      if (fr.style.stroke_width)
        el.stroke_width = std::strtod(fr.style.stroke_width->c_str(), nullptr);
      else
        el.stroke_width = el.stroke ? 1.0 : 0.0;
      el.stroke_width = std::max(0.0, el.stroke_width * std::sqrt(xf.scale_x() * xf.scale_y()));
      if (const std::string* v = find_attr(tag, "id")) el.id_attr = *v;
      if (const std::string* v = find_attr(tag, "class")) el.class_attr = *v;
      el.has_id_attr = find_attr(tag, "id") != nullptr;
      el.has_class_attr = find_attr(tag, "class") != nullptr;
      el.has_acdata_attr = find_attr(tag, "ac-data") != nullptr;

      doc.elements.push_back(std::move(el));
      if (tag.name == "text" && !tag.self_closing) {
        open_text = &doc.elements.back();
        text_content.clear();
        fr.is_text = true;
      }
    }

    if (!tag.self_closing) stack.push_back(fr);
  }

  if (!seen_root) raise(Errc::MalformedXml, "no root element");
  if (!stack.empty()) raise(Errc::MalformedXml, "unclosed element <" + stack.back().tag + ">");
  return doc;
}

}  // namespace chartrevive::svg
