#include "chartrevive/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "chartrevive/error.hpp"
#include "chartrevive/rng.hpp"

namespace chartrevive::datagen {

using recovery::ChartKind;

const char* pattern_name(Pattern p) {
  switch (p) {
    case Pattern::None: return "none";
    case Pattern::MonotoneUp: return "monotone_up";
    case Pattern::MonotoneDown: return "monotone_down";
    case Pattern::Outlier: return "outlier";
    case Pattern::DominantSlice: return "dominant_slice";
  }
  return "?";
}

std::string fmt_num(double v) {
  if (v == 0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s(buf);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::vector<std::vector<std::string>> kPalettes = {
    {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7"},
    {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"},
    {"#66c2a5", "#fc8d62", "#8da0cb", "#e78ac3", "#a6d854", "#ffd92f", "#e5c494", "#b3b3b3"},
    {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf", "#999999"},
    {"#003f5c", "#7a5195", "#ef5675", "#ffa600", "#58508d", "#bc5090", "#ff6361", "#2f4b7c"},
};

const std::vector<std::vector<std::string>> kCategoryPools = {
    {"Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"},
    {"Alpha", "Beta", "Gamma", "Delta", "Epsilon", "Zeta", "Eta", "Theta", "Iota", "Kappa",
     "Lambda", "Mu"},
    {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"},
    {"Q1", "Q2", "Q3", "Q4"},
    {"North", "South", "East", "West", "Central", "Coast", "Inland", "Upland"},
    {"2013", "2014", "2015", "2016", "2017", "2018", "2019", "2020", "2021", "2022", "2023",
     "2024", "2025"},
};

const std::vector<std::string> kSeriesPools[] = {
    {"Series A", "Series B", "Series C", "Series D"},
    {"Basic", "Plus", "Pro", "Max"},
    {"Team Red", "Team Blue", "Team Green", "Team Gold"},
    {"Online", "Retail", "Partner", "Direct"},
};

const std::vector<std::string> kTitleHeads = {"Sales",     "Revenue", "Traffic",
                                              "Rainfall",  "Energy",  "Downloads",
                                              "Shipments", "Visitors"};
const std::vector<std::string> kTitleTails = {"by Month",  "by Region", "Overview",
                                              "per Group", "Breakdown", "at a Glance"};
const std::vector<std::string> kXTitles = {"Month", "Quarter", "Region", "Product", "Year", "Day"};
const std::vector<std::string> kYTitles = {"Sales", "Revenue", "Count", "Amount", "Visitors",
                                           "Score"};
const std::vector<std::string> kLegendTitles = {"Group", "Series", "Segment", "Channel"};

std::vector<std::string> pick_categories(Rng& rng, int n) {
  std::vector<const std::vector<std::string>*> eligible;
  for (const auto& pool : kCategoryPools)
    if (int(pool.size()) >= n) eligible.push_back(&pool);
  const auto& pool = *eligible[size_t(rng.uniform_int(0, int64_t(eligible.size()) - 1))];
  return std::vector<std::string>(pool.begin(), pool.begin() + n);
}

std::vector<std::string> numbered_categories(int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(std::to_string(i));
  return out;
}

void apply_pattern(Rng& rng, Pattern p, std::vector<double>& v) {
  switch (p) {
    case Pattern::MonotoneUp:
      std::sort(v.begin(), v.end());
      break;
    case Pattern::MonotoneDown:
      std::sort(v.begin(), v.end(), std::greater<>());
      break;
    case Pattern::Outlier: {
      size_t i = size_t(rng.uniform_int(0, int64_t(v.size()) - 1));
      v[i] = std::round(v[i] * 3.5);
      break;
    }
    default:
      break;
  }
}

}  // namespace

ChartSpec make_chart_spec(ChartKind type, uint64_t seed) {
  ChartSpec spec;
  spec.type = type;
  spec.seed = seed;
  Rng rng(hash_combine(seed, uint64_t(type) * 0x9e37u + 17));

  ChartStyle& st = spec.style;
  st.palette = int(rng.uniform_int(0, int64_t(kPalettes.size()) - 1));
  double lp = rng.uniform();
  st.legend_pos = lp < 0.45 ? LegendPos::Right : lp < 0.72 ? LegendPos::Top : LegendPos::None;
  st.grid = rng.chance(0.6);
  st.bar_labels = false;
  st.axis_titles = rng.chance(0.75);
  st.font_size = double(rng.uniform_int(11, 14));

  double fmt = rng.uniform();
  double scale = 1;
  if (fmt < 0.60) {
    st.label_format = LabelFormat::Plain;
  } else if (fmt < 0.75) {
    st.label_format = LabelFormat::Thousands;
    scale = 100;
  } else if (fmt < 0.90) {
    st.label_format = LabelFormat::Kilo;
    scale = 100;
  } else {
    st.label_format = LabelFormat::Percent;
  }

  if (rng.chance(0.85))
    spec.title = rng.pick(kTitleHeads) + " " + rng.pick(kTitleTails);
  if (st.axis_titles && type != ChartKind::Pie) {
    spec.x_title = rng.pick(kXTitles);
    spec.y_title = rng.pick(kYTitles);
  }

  int series_count = 1;
  if (st.legend_pos != LegendPos::None && type != ChartKind::Pie)
    series_count = int(rng.uniform_int(1, 4));

  const auto& series_pool = kSeriesPools[rng.uniform_int(0, 3)];
  if (st.legend_pos != LegendPos::None) spec.legend_title = rng.pick(kLegendTitles);

  switch (type) {
    case ChartKind::Bar: {
      int cats = int(rng.uniform_int(3, 12));
      spec.categories = pick_categories(rng, cats);
      spec.pattern = rng.chance(0.5)
                         ? Pattern::None
                         : (rng.chance(0.5) ? (rng.chance(0.5) ? Pattern::MonotoneUp
                                                               : Pattern::MonotoneDown)
                                            : Pattern::Outlier);
      for (int s = 0; s < series_count; ++s) {
        SeriesData sd;
        sd.name = series_pool[size_t(s)];
        for (int i = 0; i < cats; ++i) sd.values.push_back(double(rng.uniform_int(5, 100)) * scale);
        apply_pattern(rng, spec.pattern, sd.values);
        spec.series.push_back(sd);
      }
      st.bar_labels = series_count == 1 && rng.chance(0.35);
      break;
    }
    case ChartKind::Line: {
      int points = int(rng.uniform_int(5, 20));
      spec.categories = points <= 12 ? pick_categories(rng, points) : numbered_categories(points);
      spec.pattern = rng.chance(0.45)
                         ? Pattern::None
                         : (rng.chance(0.6) ? (rng.chance(0.5) ? Pattern::MonotoneUp
                                                               : Pattern::MonotoneDown)
                                            : Pattern::Outlier);
      for (int s = 0; s < series_count; ++s) {
        SeriesData sd;
        sd.name = series_pool[size_t(s)];
        double v = double(rng.uniform_int(25, 75));
        for (int i = 0; i < points; ++i) {
          sd.values.push_back(std::round(v) * scale);
          v = std::clamp(v + double(rng.uniform_int(-15, 15)), 5.0, 120.0);
        }
        apply_pattern(rng, spec.pattern, sd.values);
        spec.series.push_back(sd);
      }
      break;
    }
    case ChartKind::Pie: {
      int slices = int(rng.uniform_int(2, 8));
      spec.categories = pick_categories(rng, slices);
      spec.pattern = rng.chance(0.6) ? Pattern::None : Pattern::DominantSlice;
      st.donut_ratio = rng.chance(0.4) ? rng.uniform(0.3, 0.7) : 0.0;
      st.label_format = LabelFormat::Plain;
      SeriesData sd;
      sd.name = spec.legend_title.empty() ? "value" : spec.legend_title;
      for (int i = 0; i < slices; ++i) sd.values.push_back(double(rng.uniform_int(5, 100)));
      if (spec.pattern == Pattern::DominantSlice) {
        double rest = std::accumulate(sd.values.begin() + 1, sd.values.end(), 0.0);
        double share = rng.uniform(0.55, 0.72);
        sd.values[0] = std::round(rest * share / (1 - share));
      }
      spec.series.push_back(sd);
      break;
    }
  }
  return spec;
}

// --- rendering -----------------------------------------------------------------------

namespace {

std::string format_tick(double v, LabelFormat fmt) {
  switch (fmt) {
    case LabelFormat::Plain:
      return fmt_num(v);
    case LabelFormat::Percent:
      return fmt_num(v) + "%";
    case LabelFormat::Kilo:
      if (std::fabs(v) >= 1000) return fmt_num(v / 1000.0) + "k";
      return fmt_num(v);
    case LabelFormat::Thousands: {
      std::string digits = fmt_num(v);
      std::string frac;
      size_t dot = digits.find('.');
      if (dot != std::string::npos) {
        frac = digits.substr(dot);
        digits = digits.substr(0, dot);
      }
      std::string out;
      int count = 0;
      for (size_t i = digits.size(); i-- > 0;) {
        out += digits[i];
        if (++count % 3 == 0 && i > 0 && digits[i - 1] != '-') out += ',';
      }
      std::reverse(out.begin(), out.end());
      return out + frac;
    }
  }
  return fmt_num(v);
}

std::string xml_escape_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

// Emits flat SVG children while recording ground-truth labels in document
// order, matching the indices parse_svg will assign.
class SvgWriter {
public:
  SvgWriter(double w, double h) {
    buf_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_num(w) + "\" height=\"" +
            fmt_num(h) + "\" viewBox=\"0 0 " + fmt_num(w) + " " + fmt_num(h) + "\">\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& label, const std::string& stroke = "", double sw = 0) {
    buf_ += "  <rect x=\"" + fmt_num(x) + "\" y=\"" + fmt_num(y) + "\" width=\"" + fmt_num(w) +
            "\" height=\"" + fmt_num(h) + "\"";
    paint(fill, stroke, sw);
    buf_ += "/>\n";
    tag(label);
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double sw,
            const std::string& label) {
    buf_ += "  <line x1=\"" + fmt_num(x1) + "\" y1=\"" + fmt_num(y1) + "\" x2=\"" + fmt_num(x2) +
            "\" y2=\"" + fmt_num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
            fmt_num(sw) + "\"/>\n";
    tag(label);
  }

  void text(double x, double y, const std::string& content, double size,
            const std::string& anchor, const std::string& fill, const std::string& label) {
    buf_ += "  <text x=\"" + fmt_num(x) + "\" y=\"" + fmt_num(y) + "\" font-size=\"" +
            fmt_num(size) + "\" text-anchor=\"" + anchor + "\" fill=\"" + fill + "\">" +
            xml_escape_text(content) + "</text>\n";
    tag(label);
  }

  void circle(double cx, double cy, double r, const std::string& fill, const std::string& label) {
    buf_ += "  <circle cx=\"" + fmt_num(cx) + "\" cy=\"" + fmt_num(cy) + "\" r=\"" + fmt_num(r) +
            "\" fill=\"" + fill + "\"/>\n";
    tag(label);
  }

  void polyline(const std::vector<svg::Point>& pts, const std::string& stroke, double sw,
                const std::string& label) {
    buf_ += "  <polyline points=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
      if (i) buf_ += ' ';
      buf_ += fmt_num(pts[i].x) + "," + fmt_num(pts[i].y);
    }
    buf_ += "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt_num(sw) + "\"/>\n";
    tag(label);
  }

  void path(const std::string& d, const std::string& fill, const std::string& label,
            const std::string& stroke = "", double sw = 0) {
    buf_ += "  <path d=\"" + d + "\"";
    paint(fill, stroke, sw);
    buf_ += "/>\n";
    tag(label);
  }

  std::string finish() { return buf_ + "</svg>\n"; }

  const std::map<int, std::string>& labels() const { return labels_; }

private:
  void paint(const std::string& fill, const std::string& stroke, double sw) {
    buf_ += " fill=\"" + (fill.empty() ? std::string("none") : fill) + "\"";
    if (!stroke.empty())
      buf_ += " stroke=\"" + stroke + "\" stroke-width=\"" + fmt_num(sw) + "\"";
  }

  void tag(const std::string& label) { labels_[next_index_++] = label; }

  std::string buf_;
  int next_index_ = 0;
  std::map<int, std::string> labels_;
};

struct Layout {
  double left, right, top, bottom;  // plot rectangle edges

  double plot_w() const { return right - left; }
  double plot_h() const { return bottom - top; }
};

Layout make_layout(const ChartSpec& spec) {
  const ChartStyle& st = spec.style;
  Layout l;
  l.left = 64;
  l.right = st.width - (st.legend_pos == LegendPos::Right ? 142 : 24);
  l.top = (spec.title.empty() ? 24 : 48) + (st.legend_pos == LegendPos::Top ? 30 : 0);
  l.bottom = st.height - 58;
  return l;
}

struct YAxis {
  double top_value;
  std::vector<double> ticks;
};

YAxis nice_axis(double vmax, int tick_count) {
  double raw = vmax / tick_count;
  double mag = std::pow(10.0, std::floor(std::log10(std::max(raw, 1e-9))));
  double norm = raw / mag;
  double step = (norm <= 1 ? 1 : norm <= 2 ? 2 : norm <= 5 ? 5 : 10) * mag;
  YAxis axis;
  axis.top_value = std::ceil(vmax / step) * step;
  for (double v = 0; v <= axis.top_value + step / 2; v += step) axis.ticks.push_back(v);
  return axis;
}

void draw_legend(SvgWriter& w, const ChartSpec& spec, const Layout& l,
                 const std::vector<std::string>& entries,
                 const std::vector<std::string>& colors) {
  const ChartStyle& st = spec.style;
  double fs = st.font_size;
  if (st.legend_pos == LegendPos::Right) {
    double lx = l.right + 16;
    double ly = l.top + 14;
    if (!spec.legend_title.empty())
      w.text(lx, ly - 6, spec.legend_title, fs, "start", "#333333", "legend-title");
    for (size_t s = 0; s < entries.size(); ++s) {
      double sy = ly + double(s) * 20;
      w.rect(lx, sy, 12, 12, colors[s % colors.size()], "legend-symbol");
      w.text(lx + 18, sy + 10, entries[s], fs, "start", "#333333", "legend-label");
    }
  } else if (st.legend_pos == LegendPos::Top) {
    double ly = l.top - 18;
    double lx = l.left;
    if (!spec.legend_title.empty()) {
      w.text(lx, ly + 10, spec.legend_title, fs, "start", "#333333", "legend-title");
      lx += 0.62 * fs * double(spec.legend_title.size()) + 14;
    }
    for (size_t s = 0; s < entries.size(); ++s) {
      w.rect(lx, ly, 12, 12, colors[s % colors.size()], "legend-symbol");
      w.text(lx + 18, ly + 10, entries[s], fs, "start", "#333333", "legend-label");
      lx += 18 + 0.62 * fs * double(entries[s].size()) + 16;
    }
  }
}

void draw_cartesian_frame(SvgWriter& w, const ChartSpec& spec, const Layout& l,
                          const YAxis& axis) {
  const ChartStyle& st = spec.style;
  double fs = st.font_size;

  if (st.grid)
    for (double v : axis.ticks) {
      if (v == 0) continue;
      double y = l.bottom - v / axis.top_value * l.plot_h();
      w.line(l.left, y, l.right, y, "#e0e0e0", 1, "grid-line");
    }

  w.line(l.left, l.bottom, l.right, l.bottom, "#333333", 1.5, "axis-line");
  w.line(l.left, l.top, l.left, l.bottom, "#333333", 1.5, "axis-line");

  size_t n = spec.categories.size();
  for (size_t i = 0; i < n; ++i) {
    double cx = l.left + (double(i) + 0.5) * l.plot_w() / double(n);
    w.line(cx, l.bottom, cx, l.bottom + 5, "#333333", 1, "tick");
  }
  for (double v : axis.ticks) {
    double y = l.bottom - v / axis.top_value * l.plot_h();
    w.line(l.left - 5, y, l.left, y, "#333333", 1, "tick");
  }
  for (size_t i = 0; i < n; ++i) {
    double cx = l.left + (double(i) + 0.5) * l.plot_w() / double(n);
    w.text(cx, l.bottom + 8 + fs, spec.categories[i], fs, "middle", "#333333", "x-label");
  }
  for (double v : axis.ticks) {
    double y = l.bottom - v / axis.top_value * l.plot_h();
    w.text(l.left - 8, y + 0.35 * fs, format_tick(v, st.label_format), fs, "end", "#333333",
           "y-label");
  }
  if (!spec.x_title.empty())
    w.text((l.left + l.right) / 2, st.height - 12, spec.x_title, fs + 1, "middle", "#333333",
           "x-title");
  if (!spec.y_title.empty())
    w.text(8, l.top - 10, spec.y_title, fs + 1, "start", "#333333", "y-title");
}

}  // namespace

std::pair<std::string, GroundTruth> generate_chart(const ChartSpec& spec) {
  if (spec.series.empty() || spec.categories.empty())
    raise(Errc::InvalidSpec, "spec has no data");
  size_t n = spec.categories.size();
  for (const SeriesData& s : spec.series)
    if (s.values.size() != n) raise(Errc::InvalidSpec, "series length != category count");
  switch (spec.type) {
    case ChartKind::Bar:
      if (n < 3 || n > 12) raise(Errc::InvalidSpec, "bar categories must be 3..12");
      break;
    case ChartKind::Line:
      if (n < 5 || n > 20) raise(Errc::InvalidSpec, "line points must be 5..20");
      break;
    case ChartKind::Pie:
      if (n < 2 || n > 8) raise(Errc::InvalidSpec, "pie slices must be 2..8");
      for (double v : spec.series[0].values)
        if (v <= 0) raise(Errc::InvalidSpec, "pie slice values must be positive");
      break;
  }
  if (spec.series.size() > 4) raise(Errc::InvalidSpec, "at most 4 series");
  if (spec.style.legend_pos == LegendPos::None && spec.series.size() > 1)
    raise(Errc::InvalidSpec, "multi-series charts need a legend");
  if (spec.style.donut_ratio < 0 || spec.style.donut_ratio > 0.7)
    raise(Errc::InvalidSpec, "donut ratio outside [0, 0.7]");

  const ChartStyle& st = spec.style;
  const auto& palette = kPalettes[size_t(st.palette) % kPalettes.size()];
  double fs = st.font_size;
  Layout l = make_layout(spec);
  SvgWriter w(st.width, st.height);
  bool has_legend = st.legend_pos != LegendPos::None;

  w.rect(0, 0, st.width, st.height, "#ffffff", "canvas");
  if (!spec.title.empty())
    w.text(st.width / 2, 30, spec.title, fs + 4, "middle", "#111111", "chart-title");

  GroundTruth gt;
  gt.meta.chart_type = chart_kind_name(spec.type);
  gt.meta.title = spec.title.empty() ? "None" : spec.title;
  gt.meta.x_title = spec.x_title.empty() ? "None" : spec.x_title;
  gt.meta.y_title = spec.y_title.empty() ? "None" : spec.y_title;
  gt.meta.legend_title = (has_legend && !spec.legend_title.empty()) ? spec.legend_title : "None";
  gt.meta.pattern = pattern_name(spec.pattern);
  gt.table.x_name = gt.meta.x_title;
  gt.table.y_name = gt.meta.y_title;
  gt.table.legend_name = gt.meta.legend_title;
  gt.table.has_legend = has_legend;

  if (spec.type == ChartKind::Pie) {
    const std::vector<double>& values = spec.series[0].values;
    double total = std::accumulate(values.begin(), values.end(), 0.0);
    double cx = (l.left + l.right) / 2;
    double cy = (l.top + l.bottom) / 2;
    double r = std::min(l.plot_w(), l.plot_h()) / 2 - 8;
    double ri = r * st.donut_ratio;

    double angle = -kPi / 2;
    for (size_t i = 0; i < n; ++i) {
      double frac = values[i] / total;
      double a0 = angle;
      double a1 = angle + frac * 2 * kPi;
      angle = a1;
      int large = frac > 0.5 ? 1 : 0;
      auto px = [&](double a, double rad) { return fmt_num(cx + rad * std::cos(a)); };
      auto py = [&](double a, double rad) { return fmt_num(cy + rad * std::sin(a)); };
      std::string d;
      if (ri > 0) {
        d = "M" + px(a0, r) + " " + py(a0, r) + " A" + fmt_num(r) + " " + fmt_num(r) + " 0 " +
            std::to_string(large) + " 1 " + px(a1, r) + " " + py(a1, r) + " L" + px(a1, ri) +
            " " + py(a1, ri) + " A" + fmt_num(ri) + " " + fmt_num(ri) + " 0 " +
            std::to_string(large) + " 0 " + px(a0, ri) + " " + py(a0, ri) + " Z";
      } else {
        d = "M" + fmt_num(cx) + " " + fmt_num(cy) + " L" + px(a0, r) + " " + py(a0, r) + " A" +
            fmt_num(r) + " " + fmt_num(r) + " 0 " + std::to_string(large) + " 1 " + px(a1, r) +
            " " + py(a1, r) + " Z";
      }
      w.path(d, palette[i % palette.size()], "sector");

      recovery::DataRow row;
      row.x = spec.categories[i];
      row.y = frac * 100.0;
      if (has_legend) row.series = spec.categories[i];
      gt.table.rows.push_back(row);
    }
    if (has_legend) {
      gt.meta.legend_entries = spec.categories;
      draw_legend(w, spec, l, spec.categories, palette);
    }
  } else {
    double vmax = 0;
    for (const SeriesData& s : spec.series)
      for (double v : s.values) vmax = std::max(vmax, v);
    YAxis axis = nice_axis(vmax, 4);
    auto ypix = [&](double v) { return l.bottom - v / axis.top_value * l.plot_h(); };
    auto xcenter = [&](size_t i) {
      return l.left + (double(i) + 0.5) * l.plot_w() / double(n);
    };

    draw_cartesian_frame(w, spec, l, axis);

    if (spec.type == ChartKind::Bar) {
      double band = l.plot_w() / double(n);
      double group_w = band * 0.7;
      double bar_w = group_w / double(spec.series.size());
      for (size_t i = 0; i < n; ++i) {
        for (size_t s = 0; s < spec.series.size(); ++s) {
          double v = spec.series[s].values[i];
          double x = l.left + double(i) * band + band * 0.15 + double(s) * bar_w;
          w.rect(x, ypix(v), bar_w, l.bottom - ypix(v), palette[s % palette.size()], "bar");
          recovery::DataRow row;
          row.x = spec.categories[i];
          row.y = v;
          if (has_legend) row.series = spec.series[s].name;
          gt.table.rows.push_back(row);
        }
      }
      if (st.bar_labels)
        for (size_t i = 0; i < n; ++i) {
          double v = spec.series[0].values[i];
          w.text(xcenter(i), ypix(v) - 5, format_tick(v, st.label_format), fs - 1, "middle",
                 "#333333", "mark-label");
        }
    } else {
      for (size_t s = 0; s < spec.series.size(); ++s) {
        std::vector<svg::Point> pts;
        for (size_t i = 0; i < n; ++i) pts.push_back({xcenter(i), ypix(spec.series[s].values[i])});
        w.polyline(pts, palette[s % palette.size()], 2, "line-segment");
        for (size_t i = 0; i < n; ++i) {
          recovery::DataRow row;
          row.x = spec.categories[i];
          row.y = spec.series[s].values[i];
          if (has_legend) row.series = spec.series[s].name;
          gt.table.rows.push_back(row);
        }
      }
      // point dots ride on top of the polylines
      for (size_t s = 0; s < spec.series.size(); ++s)
        for (size_t i = 0; i < n; ++i)
          w.circle(xcenter(i), ypix(spec.series[s].values[i]), 3, palette[s % palette.size()],
                   "point");
    }

    if (has_legend) {
      std::vector<std::string> entries;
      for (const SeriesData& s : spec.series) entries.push_back(s.name);
      gt.meta.legend_entries = entries;
      draw_legend(w, spec, l, entries, palette);
    }
  }

  std::string svg_text = w.finish();
  gt.labels = w.labels();
  return {svg_text, gt};
}

// --- dataset + manifests -------------------------------------------------------------

namespace {

std::string split_for(uint64_t dataset_seed, uint64_t chart_index) {
  Rng rng(hash_combine(dataset_seed ^ 0x5eedf00dull, chart_index));
  double u = rng.uniform();
  return u < 0.8 ? "train" : u < 0.9 ? "val" : "test";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::IoError, "cannot write " + path);
  out << content;
}

}  // namespace

Manifest generate_dataset(int count_per_type, uint64_t seed, const std::string& out_dir) {
  if (count_per_type < 1) raise(Errc::InvalidSpec, "count_per_type must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) raise(Errc::IoError, "cannot create " + out_dir + ": " + ec.message());

  const ChartKind kinds[] = {ChartKind::Bar, ChartKind::Line, ChartKind::Pie};
  size_t total = size_t(count_per_type) * 3;
  std::vector<ManifestEntry> entries(total);
  std::string first_error;

#pragma omp parallel for schedule(dynamic)
  for (size_t idx = 0; idx < total; ++idx) {
    try {
      ChartKind kind = kinds[idx / size_t(count_per_type)];
      int i = int(idx % size_t(count_per_type));
      uint64_t chart_seed = hash_combine(seed, idx + 1);
      ChartSpec spec = make_chart_spec(kind, chart_seed);
      auto [svg_text, gt] = generate_chart(spec);

      char name[64];
      std::snprintf(name, sizeof(name), "%s_%04d", chart_kind_name(kind), i);
      std::string stem = std::string(out_dir) + "/" + name;
      write_file(stem + ".svg", svg_text);
      write_file(stem + ".truth.json", ground_truth_json(gt));

      ManifestEntry& e = entries[idx];
      e.path = std::string(name) + ".svg";
      e.type = chart_kind_name(kind);
      e.seed = chart_seed;
      e.split = split_for(seed, idx);
    } catch (const std::exception& ex) {
#pragma omp critical
      if (first_error.empty()) first_error = ex.what();
    }
  }
  if (!first_error.empty()) raise(Errc::IoError, "dataset generation failed: " + first_error);

  Manifest m;
  m.charts = std::move(entries);
  write_file(std::string(out_dir) + "/manifest.json", manifest_json(m));
  return m;
}

std::string manifest_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["charts"] = nlohmann::json::array();
  for (const ManifestEntry& e : m.charts)
    j["charts"].push_back(
        {{"path", e.path}, {"type", e.type}, {"seed", e.seed}, {"split", e.split}});
  return j.dump(2);
}

Manifest manifest_from_json(const std::string& text) {
  Manifest m;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::IoError, std::string("bad manifest: ") + e.what());
  }
  for (const auto& c : j.at("charts")) {
    ManifestEntry e;
    e.path = c.at("path").get<std::string>();
    e.type = c.at("type").get<std::string>();
    e.seed = c.at("seed").get<uint64_t>();
    e.split = c.at("split").get<std::string>();
    m.charts.push_back(e);
  }
  return m;
}

std::string ground_truth_json(const GroundTruth& gt) {
  nlohmann::ordered_json j;
  j["labels"] = nlohmann::ordered_json::object();
  for (const auto& [idx, name] : gt.labels) j["labels"][std::to_string(idx)] = name;

  nlohmann::ordered_json table;
  table["fields"] = {{"x", gt.table.x_name}, {"y", gt.table.y_name},
                     {"legend", gt.table.legend_name}};
  table["hasLegend"] = gt.table.has_legend;
  table["rows"] = nlohmann::json::array();
  for (const auto& row : gt.table.rows) {
    nlohmann::ordered_json r;
    r["x"] = row.x;
    r["y"] = row.y;
    if (row.series) r["series"] = *row.series;
    table["rows"].push_back(r);
  }
  j["table"] = table;

  nlohmann::ordered_json meta;
  meta["chartType"] = gt.meta.chart_type;
  meta["title"] = gt.meta.title;
  meta["xTitle"] = gt.meta.x_title;
  meta["yTitle"] = gt.meta.y_title;
  meta["legendTitle"] = gt.meta.legend_title;
  meta["legendEntries"] = gt.meta.legend_entries;
  meta["pattern"] = gt.meta.pattern;
  j["meta"] = meta;
  return j.dump(2);
}

GroundTruth ground_truth_from_json(const std::string& text) {
  GroundTruth gt;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::IoError, std::string("bad ground truth: ") + e.what());
  }
  for (const auto& [key, value] : j.at("labels").items())
    gt.labels[std::stoi(key)] = value.get<std::string>();
  const auto& table = j.at("table");
  gt.table.x_name = table.at("fields").at("x").get<std::string>();
  gt.table.y_name = table.at("fields").at("y").get<std::string>();
  gt.table.legend_name = table.at("fields").at("legend").get<std::string>();
  gt.table.has_legend = table.at("hasLegend").get<bool>();
  for (const auto& r : table.at("rows")) {
    recovery::DataRow row;
    row.x = r.at("x").get<std::string>();
    row.y = r.at("y").get<double>();
    if (r.contains("series")) row.series = r.at("series").get<std::string>();
    gt.table.rows.push_back(row);
  }
  const auto& meta = j.at("meta");
  gt.meta.chart_type = meta.at("chartType").get<std::string>();
  gt.meta.title = meta.at("title").get<std::string>();
  gt.meta.x_title = meta.at("xTitle").get<std::string>();
  gt.meta.y_title = meta.at("yTitle").get<std::string>();
  gt.meta.legend_title = meta.at("legendTitle").get<std::string>();
  gt.meta.legend_entries = meta.at("legendEntries").get<std::vector<std::string>>();
  if (meta.contains("pattern")) gt.meta.pattern = meta.at("pattern").get<std::string>();
  return gt;
}

}  // namespace chartrevive::datagen
