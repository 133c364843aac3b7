#include "chartrevive/recovery.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "chartrevive/error.hpp"
#include "chartrevive/graph.hpp"

namespace chartrevive::recovery {

using svg::ElemKind;
using svg::Point;
using svg::Rect;
using svg::SvgElement;

const char* chart_kind_name(ChartKind k) {
  switch (k) {
    case ChartKind::Bar: return "bar";
    case ChartKind::Line: return "line";
    case ChartKind::Pie: return "pie";
  }
  return "?";
}

// --- taxonomy -------------------------------------------------------------------

Taxonomy Taxonomy::default_taxonomy() {
  Taxonomy t;
  t.primaries = {"background", "title", "legend", "mark", "axis"};
  t.subs = {
      {"canvas", "background"},        {"grid-line", "background"},
      {"chart-title", "title"},        {"legend-symbol", "legend"},
      {"legend-label", "legend"},      {"legend-title", "legend"},
      {"bar", "mark"},                 {"line-segment", "mark"},
      {"point", "mark"},               {"sector", "mark"},
      {"mark-label", "mark"},          {"axis-line", "axis"},
      {"tick", "axis"},                {"x-label", "axis"},
      {"y-label", "axis"},             {"x-title", "axis"},
      {"y-title", "axis"},
  };
  return t;
}

Taxonomy Taxonomy::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::IoError, std::string("bad taxonomy json: ") + e.what());
  }
  Taxonomy t;
  t.primaries = j.at("primaries").get<std::vector<std::string>>();
  for (const auto& sub : j.at("subs")) {
    Taxonomy::Sub s;
    s.name = sub.at("name").get<std::string>();
    s.primary = sub.at("primary").get<std::string>();
    if (std::find(t.primaries.begin(), t.primaries.end(), s.primary) == t.primaries.end())
      raise(Errc::IoError, "taxonomy sub '" + s.name + "' maps to unknown primary '" + s.primary + "'");
    if (t.index_of(s.name) >= 0)
      raise(Errc::IoError, "duplicate taxonomy sub '" + s.name + "'");
    t.subs.push_back(s);
  }
  if (t.subs.empty()) raise(Errc::IoError, "taxonomy has no sub-categories");
  return t;
}

std::string Taxonomy::to_json() const {
  nlohmann::ordered_json j;
  j["primaries"] = primaries;
  j["subs"] = nlohmann::json::array();
  for (const auto& s : subs) j["subs"].push_back({{"name", s.name}, {"primary", s.primary}});
  return j.dump(2);
}

int Taxonomy::index_of(const std::string& sub_name) const {
  for (size_t i = 0; i < subs.size(); ++i)
    if (subs[i].name == sub_name) return int(i);
  return -1;
}

const std::string& Taxonomy::primary_of(const std::string& sub_name) const {
  int i = index_of(sub_name);
  if (i < 0) raise(Errc::UnknownField, "sub-category '" + sub_name + "' not in taxonomy");
  return subs[size_t(i)].primary;
}

std::vector<std::string> Taxonomy::sub_names() const {
  std::vector<std::string> names;
  names.reserve(subs.size());
  for (const auto& s : subs) names.push_back(s.name);
  return names;
}

// --- labeling --------------------------------------------------------------------

namespace {

std::vector<int> elements_labeled(const LabeledChart& chart, const std::string& sub) {
  std::vector<int> out;
  for (const auto& [idx, name] : chart.labels)
    if (name == sub) out.push_back(idx);
  return out;
}

bool color_close(const svg::Rgb& a, const svg::Rgb& b) {
  const double tol = 1.0 / 255.0;
  return std::fabs(a.r - b.r) <= tol && std::fabs(a.g - b.g) <= tol && std::fabs(a.b - b.b) <= tol;
}

bool is_data_mark(const std::string& sub) {
  return sub == "bar" || sub == "line-segment" || sub == "point" || sub == "sector";
}

}  // namespace

LabeledChart label_chart(const svg::SvgDocument& doc, const std::map<int, std::string>& labels) {
  LabeledChart chart;
  chart.doc = doc;
  chart.labels = labels;
  std::map<std::string, int> counters;
  for (const SvgElement& e : doc.elements) {
    auto it = labels.find(e.index);
    if (it == labels.end()) continue;
    int n = counters[it->second]++;
    chart.ids[e.index] = it->second + "-" + std::to_string(n);
  }
  chart.series = match_legend(chart);
  return chart;
}

std::map<int, std::string> match_legend(const LabeledChart& chart) {
  std::map<int, std::string> out;
  std::vector<int> symbols = elements_labeled(chart, "legend-symbol");
  std::vector<int> labels = elements_labeled(chart, "legend-label");
  if (symbols.empty() || labels.empty()) return out;

  // pair each symbol with the nearest label by top-left bbox distance
  std::map<int, std::string> symbol_entry;
  for (int s : symbols) {
    Rect sb = svg::element_bbox(chart.doc.elements[size_t(s)]);
    double best = 0;
    int best_label = -1;
    for (int l : labels) {
      Rect lb = svg::element_bbox(chart.doc.elements[size_t(l)]);
      double d = std::hypot(sb.x - lb.x, sb.y - lb.y);
      if (best_label < 0 || d < best) {
        best = d;
        best_label = l;
      }
    }
    symbol_entry[s] = chart.doc.elements[size_t(best_label)].text.content;
  }

  // assign marks by paint equality; fill-fill first, then stroke-stroke,
  // then the cross pairings; ties go to the lower symbol index
  for (const auto& [idx, sub] : chart.labels) {
    if (!is_data_mark(sub)) continue;
    const SvgElement& mark = chart.doc.elements[size_t(idx)];
    int best_tier = 5;
    int best_symbol = -1;
    for (int s : symbols) {
      const SvgElement& sym = chart.doc.elements[size_t(s)];
      int tier = 5;
      if (mark.fill && sym.fill && color_close(*mark.fill, *sym.fill)) tier = 1;
      else if (mark.stroke && sym.stroke && color_close(*mark.stroke, *sym.stroke)) tier = 2;
      else if (mark.fill && sym.stroke && color_close(*mark.fill, *sym.stroke)) tier = 3;
      else if (mark.stroke && sym.fill && color_close(*mark.stroke, *sym.fill)) tier = 4;
      if (tier < best_tier) {
        best_tier = tier;
        best_symbol = s;
      }
    }
    if (best_symbol >= 0 && best_tier < 5) out[idx] = symbol_entry[best_symbol];
  }
  return out;
}

ChartKind detect_chart_kind(const LabeledChart& chart) {
  size_t sectors = elements_labeled(chart, "sector").size();
  size_t bars = elements_labeled(chart, "bar").size();
  size_t lines = elements_labeled(chart, "line-segment").size() +
                 elements_labeled(chart, "point").size();
  if (sectors == 0 && bars == 0 && lines == 0)
    raise(Errc::UnsupportedChart, "no mark elements found");
  if (sectors >= bars && sectors >= lines && sectors > 0) return ChartKind::Pie;
  if (bars >= lines && bars > 0) return ChartKind::Bar;
  return ChartKind::Line;
}

// --- numeric labels ----------------------------------------------------------------

double parse_numeric_label(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(uint8_t(c)) && c != ',') t += c;
  if (t.empty()) raise(Errc::UnparsableLabel, "empty label");

  double mult = 1;
  char last = t.back();
  if (last == '%') t.pop_back();
  else if (last == 'k' || last == 'K') { mult = 1e3; t.pop_back(); }
  else if (last == 'M') { mult = 1e6; t.pop_back(); }
  if (t.empty()) raise(Errc::UnparsableLabel, "label '" + text + "'");

  char* stop = nullptr;
  double v = std::strtod(t.c_str(), &stop);
  if (stop != t.c_str() + t.size()) raise(Errc::UnparsableLabel, "label '" + text + "'");
  return v * mult;
}

// --- data calculation ----------------------------------------------------------------

namespace {

struct TitleText {
  std::string x = "None", y = "None", legend = "None", title = "None";
};

TitleText collect_titles(const LabeledChart& chart) {
  TitleText t;
  auto first_text = [&](const char* sub) -> std::string {
    for (int idx : elements_labeled(chart, sub)) {
      const std::string& s = chart.doc.elements[size_t(idx)].text.content;
      if (!s.empty()) return s;
    }
    return "None";
  };
  t.x = first_text("x-title");
  t.y = first_text("y-title");
  t.legend = first_text("legend-title");
  t.title = first_text("chart-title");
  return t;
}

// Longest arc segment of a sector path; donut sectors measure the outer arc.
double sector_outer_arc(const SvgElement& e) {
  if (e.kind != ElemKind::Path) raise(Errc::UnsupportedChart, "sector is not a path");
  double best = 0;
  for (const svg::Subpath& sp : e.path.subpaths) {
    Point cur = sp.start();
    for (const svg::Segment& s : sp.segments) {
      if (s.kind == svg::SegKind::ArcTo) best = std::max(best, svg::segment_length(cur, s));
      cur = s.to;
    }
  }
  if (best <= 0) raise(Errc::UnsupportedChart, "sector path has no arc segment");
  return best;
}

// Mid point of the longest arc, for sector annotations.
Point sector_arc_midpoint(const SvgElement& e) {
  const svg::Segment* best_seg = nullptr;
  Point best_from{};
  double best_len = -1;
  for (const svg::Subpath& sp : e.path.subpaths) {
    Point cur = sp.start();
    for (const svg::Segment& s : sp.segments) {
      if (s.kind == svg::SegKind::ArcTo) {
        double len = svg::segment_length(cur, s);
        if (len > best_len) {
          best_len = len;
          best_seg = &s;
          best_from = cur;
        }
      }
      cur = s.to;
    }
  }
  if (!best_seg) return {0, 0};
  // flatten and take the middle sample
  SvgElement tmp;
  tmp.kind = ElemKind::Path;
  svg::Subpath sp;
  svg::Segment move;
  move.kind = svg::SegKind::MoveTo;
  move.to = best_from;
  sp.segments.push_back(move);
  sp.segments.push_back(*best_seg);
  tmp.path.subpaths.push_back(sp);
  auto polys = svg::flatten_element(tmp, 0.5);
  const auto& poly = polys.front();
  return poly[poly.size() / 2];
}

// Per-mark anchors used both for value recovery and for annotation placement.
// Bars anchor at the top edge; line vertices and point centers carry one
// anchor each; sectors anchor at the outer-arc midpoint.
struct RecoveredMark {
  int element = 0;
  std::vector<Point> anchors;
};

std::vector<RecoveredMark> cartesian_marks(const LabeledChart& chart, ChartKind kind) {
  std::vector<RecoveredMark> out;
  std::vector<int> primary;
  if (kind == ChartKind::Bar) {
    primary = elements_labeled(chart, "bar");
  } else {
    primary = elements_labeled(chart, "line-segment");
    if (primary.empty()) primary = elements_labeled(chart, "point");
  }
  for (int idx : primary) {
    const SvgElement& e = chart.doc.elements[size_t(idx)];
    RecoveredMark m;
    m.element = idx;
    if (kind == ChartKind::Bar) {
      Rect r = svg::element_bbox(e);
      m.anchors.push_back({r.cx(), r.y});
    } else if (e.kind == ElemKind::Circle || e.kind == ElemKind::Ellipse) {
      m.anchors.push_back(e.center);
    } else {
      m.anchors = graph::element_anchors(e);
    }
    out.push_back(std::move(m));
  }
  return out;
}

struct AxisFit {
  double slope = 0, intercept = 0;
  bool ok = false;

  double value_at(double y) const { return slope * y + intercept; }
};

// Least-squares line through all (label center_y, numeric value) pairs.
AxisFit fit_y_axis(const LabeledChart& chart) {
  std::vector<std::pair<double, double>> pts;
  std::set<double> distinct;
  for (int idx : elements_labeled(chart, "y-label")) {
    const SvgElement& e = chart.doc.elements[size_t(idx)];
    double value;
    try {
      value = parse_numeric_label(e.text.content);
    } catch (const Error&) {
      continue;  // mislabeled or non-numeric axis text; fit uses the rest
    }
    double cy = svg::element_bbox(e).cy();
    pts.push_back({cy, value});
    distinct.insert(cy);
  }
  AxisFit fit;
  if (pts.size() < 2 || distinct.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = double(pts.size());
  double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.ok = true;
  return fit;
}

std::string nearest_x_label(double cx, const std::vector<std::pair<double, std::string>>& xlabels,
                            size_t fallback_ordinal) {
  if (xlabels.empty()) return std::to_string(fallback_ordinal);
  double best = 0;
  const std::string* text = nullptr;
  for (const auto& [lx, lt] : xlabels) {
    double d = std::fabs(cx - lx);
    if (!text || d < best) {
      best = d;
      text = &lt;
    }
  }
  return *text;
}

}  // namespace

DataTable recover_data(const LabeledChart& chart) {
  ChartKind kind = detect_chart_kind(chart);
  TitleText titles = collect_titles(chart);

  DataTable table;
  table.has_legend = !elements_labeled(chart, "legend-symbol").empty();
  table.x_name = titles.x;
  table.y_name = titles.y;
  table.legend_name = table.has_legend ? titles.legend : "None";

  if (kind == ChartKind::Pie) {
    std::vector<int> sectors = elements_labeled(chart, "sector");
    std::vector<double> arcs;
    double total = 0;
    for (int idx : sectors) {
      double a = sector_outer_arc(chart.doc.elements[size_t(idx)]);
      arcs.push_back(a);
      total += a;
    }
    for (size_t i = 0; i < sectors.size(); ++i) {
      DataRow row;
      auto it = chart.series.find(sectors[i]);
      row.x = it != chart.series.end() ? it->second : ("slice-" + std::to_string(i));
      row.y = arcs[i] / total * 100.0;
      if (table.has_legend && it != chart.series.end()) row.series = it->second;
      table.rows.push_back(row);
    }
    return table;
  }

  // Cartesian: x from the nearest x-label, y from mark labels when present,
  // otherwise from the y-axis linear fit.
  std::vector<std::pair<double, std::string>> xlabels;
  for (int idx : elements_labeled(chart, "x-label")) {
    const SvgElement& e = chart.doc.elements[size_t(idx)];
    xlabels.push_back({svg::element_bbox(e).cx(), e.text.content});
  }

  std::vector<int> mark_labels = elements_labeled(chart, "mark-label");
  AxisFit fit = fit_y_axis(chart);
  if (mark_labels.empty() && !fit.ok)
    raise(Errc::InsufficientAxis, "fewer than 2 numeric y-labels and no mark-labels");

  std::vector<RecoveredMark> marks = cartesian_marks(chart, kind);
  size_t ordinal = 0;
  for (const RecoveredMark& m : marks) {
    auto sit = chart.series.find(m.element);
    for (const Point& anchor : m.anchors) {
      DataRow row;
      row.x = nearest_x_label(anchor.x, xlabels, ordinal);
      if (!mark_labels.empty()) {
        double best = 0;
        int best_label = -1;
        for (int l : mark_labels) {
          Rect lb = svg::element_bbox(chart.doc.elements[size_t(l)]);
          double d = std::hypot(anchor.x - lb.cx(), anchor.y - lb.cy());
          if (best_label < 0 || d < best) {
            best = d;
            best_label = l;
          }
        }
        row.y = parse_numeric_label(chart.doc.elements[size_t(best_label)].text.content);
      } else {
        row.y = fit.value_at(anchor.y);
      }
      if (table.has_legend && sit != chart.series.end()) row.series = sit->second;
      table.rows.push_back(row);
      ++ordinal;
    }
  }
  if (table.rows.empty()) raise(Errc::UnsupportedChart, "no data marks recovered");
  return table;
}

std::vector<MarkAnchor> mark_anchors(const LabeledChart& chart) {
  ChartKind kind = detect_chart_kind(chart);
  std::vector<MarkAnchor> out;
  size_t row = 0;
  if (kind == ChartKind::Pie) {
    for (int idx : elements_labeled(chart, "sector")) {
      out.push_back({idx, row++, sector_arc_midpoint(chart.doc.elements[size_t(idx)])});
    }
    return out;
  }
  for (const RecoveredMark& m : cartesian_marks(chart, kind))
    for (const Point& p : m.anchors) out.push_back({m.element, row++, p});
  return out;
}

// --- labeled svg emission --------------------------------------------------------------

namespace {

std::string xml_escape_attr(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

nlohmann::ordered_json row_values(const DataRow& row, bool has_legend) {
  nlohmann::ordered_json vals = nlohmann::ordered_json::array();
  vals.push_back(row.x);
  vals.push_back(row.y);
  if (has_legend) vals.push_back(row.series ? nlohmann::ordered_json(*row.series)
                                            : nlohmann::ordered_json("None"));
  return vals;
}

}  // namespace

std::string emit_labeled_svg(const LabeledChart& chart, const DataTable& table,
                             const Taxonomy& tax) {
  // rows per mark element, in table order
  std::map<int, std::vector<size_t>> element_rows;
  for (const MarkAnchor& a : mark_anchors(chart)) element_rows[a.element].push_back(a.row);

  std::string out;
  const std::string& raw = chart.doc.raw;
  size_t cursor = 0;

  for (const SvgElement& e : chart.doc.elements) {
    auto lit = chart.labels.find(e.index);
    if (lit == chart.labels.end()) continue;
    const std::string& sub = lit->second;
    const std::string& id = chart.ids.at(e.index);

    if (e.has_id_attr || e.has_class_attr || e.has_acdata_attr)
      raise(Errc::IdCollision, "element " + std::to_string(e.index) +
                                   " already carries class/id/ac-data attributes");

    out.append(raw, cursor, e.tag_name_end - cursor);
    cursor = e.tag_name_end;

    out += " class=\"" + tax.primary_of(sub) + " " + sub + "\"";
    out += " id=\"" + id + "\"";

    auto rit = element_rows.find(e.index);
    if (rit != element_rows.end() && is_data_mark(sub)) {
      nlohmann::ordered_json ac;
      nlohmann::ordered_json fields = nlohmann::ordered_json::array();
      fields.push_back(table.x_name);
      fields.push_back(table.y_name);
      if (table.has_legend) fields.push_back(table.legend_name);
      ac["fields"] = fields;
      if (rit->second.size() == 1) {
        ac["values"] = row_values(table.rows[rit->second[0]], table.has_legend);
      } else {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (size_t r : rit->second) rows.push_back(row_values(table.rows[r], table.has_legend));
        ac["values"] = rows;
      }
      out += " ac-data=\"" + xml_escape_attr(ac.dump()) + "\"";
    }
  }
  out.append(raw, cursor, raw.size() - cursor);
  return out;
}

DataTable parse_ac_data(const std::string& svg_text) {
  DataTable table;
  bool found = false;
  size_t pos = 0;
  std::set<std::tuple<std::string, double, std::string>> seen;

  while ((pos = svg_text.find("ac-data=\"", pos)) != std::string::npos) {
    pos += 9;
    size_t end = svg_text.find('"', pos);
    if (end == std::string::npos) raise(Errc::MalformedAcData, "unterminated ac-data attribute");
    std::string payload = svg_text.substr(pos, end - pos);
    pos = end + 1;

    // undo XML attribute escaping
    std::string json_text;
    for (size_t i = 0; i < payload.size();) {
      if (payload.compare(i, 6, "&quot;") == 0) { json_text += '"'; i += 6; }
      else if (payload.compare(i, 5, "&amp;") == 0) { json_text += '&'; i += 5; }
      else if (payload.compare(i, 4, "&lt;") == 0) { json_text += '<'; i += 4; }
      else if (payload.compare(i, 4, "&gt;") == 0) { json_text += '>'; i += 4; }
      else json_text += payload[i++];
    }

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::MalformedAcData, std::string("bad ac-data json: ") + e.what());
    }
    if (!j.contains("fields") || !j.contains("values"))
      raise(Errc::MalformedAcData, "ac-data missing fields/values");

    auto fields = j["fields"];
    if (!fields.is_array() || fields.size() < 2 || fields.size() > 3)
      raise(Errc::MalformedAcData, "ac-data needs 2 or 3 fields");
    if (!found) {
      table.x_name = fields[0].get<std::string>();
      table.y_name = fields[1].get<std::string>();
      table.has_legend = fields.size() == 3;
      if (table.has_legend) table.legend_name = fields[2].get<std::string>();
      found = true;
    }

    auto add_row = [&](const nlohmann::json& vals) {
      if (!vals.is_array() || vals.size() != fields.size())
        raise(Errc::MalformedAcData, "ac-data values arity mismatch");
      DataRow row;
      row.x = vals[0].get<std::string>();
      row.y = vals[1].get<double>();
      std::string series_key = "__none__";
      if (vals.size() == 3) {
        std::string s = vals[2].get<std::string>();
        if (s != "None") row.series = s;
        series_key = s;
      }
      // marks may repeat rows (a point over a line vertex); keep the first
      if (seen.insert({row.x, row.y, series_key}).second) table.rows.push_back(row);
    };

    const auto& values = j["values"];
    if (!values.is_array() || values.empty())
      raise(Errc::MalformedAcData, "ac-data values must be a non-empty array");
    if (values[0].is_array()) {
      for (const auto& v : values) add_row(v);
    } else {
      add_row(values);
    }
  }
  if (!found) raise(Errc::MalformedAcData, "no ac-data attributes present");
  return table;
}

}  // namespace chartrevive::recovery
