#include "chartrevive/animation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "chartrevive/datagen.hpp"
#include "chartrevive/error.hpp"
#include "chartrevive/rng.hpp"

namespace chartrevive::animation {

using datagen::fmt_num;
using narration::NarrationScript;
using recovery::LabeledChart;

const char* effect_name(Effect e) {
  switch (e) {
    case Effect::FadeIn: return "fade_in";
    case Effect::Wipe: return "wipe";
    case Effect::ShowBox: return "show_box";
    case Effect::ShowText: return "show_text";
    case Effect::ChangeColor: return "change_color";
    case Effect::Highlight: return "highlight";
    case Effect::BarBounce: return "bar_bounce";
    case Effect::ShowArrow: return "show_arrow";
    case Effect::ShowCircle: return "show_circle";
    case Effect::FadeOut: return "fade_out";
  }
  return "?";
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Entrance: return "entrance";
    case Phase::Emphasis: return "emphasis";
    case Phase::Exit: return "exit";
  }
  return "?";
}

Effect effect_from_name(const std::string& n) {
  for (int e = 0; e <= int(Effect::FadeOut); ++e)
    if (n == effect_name(Effect(e))) return Effect(e);
  raise(Errc::BadFlag, "unknown effect '" + n + "'");
}

Phase phase_from_name(const std::string& n) {
  for (int p = 0; p <= int(Phase::Exit); ++p)
    if (n == phase_name(Phase(p))) return Phase(p);
  raise(Errc::BadFlag, "unknown phase '" + n + "'");
}

Phase phase_of(Effect e) {
  switch (e) {
    case Effect::FadeIn:
    case Effect::Wipe:
      return Phase::Entrance;
    case Effect::FadeOut:
      return Phase::Exit;
    default:
      return Phase::Emphasis;
  }
}

namespace {

constexpr const char* kHighlightColor = "#ffd54f";
constexpr double kBoxPadding = 4;
constexpr double kArrowLength = 24;
constexpr double kAnnoCircleRadius = 8;

std::vector<int> labeled_as(const LabeledChart& chart, const std::string& sub) {
  std::vector<int> out;
  for (const auto& [idx, name] : chart.labels)
    if (name == sub) out.push_back(idx);
  return out;
}

std::string join_selectors(const LabeledChart& chart, const std::vector<int>& elements) {
  std::string out;
  for (int e : elements) {
    auto it = chart.ids.find(e);
    if (it == chart.ids.end()) continue;
    if (!out.empty()) out += ", ";
    out += "#" + it->second;
  }
  return out;
}

bool wide(const svg::SvgElement& e) {
  svg::Rect b = svg::element_bbox(e);
  return b.w >= b.h;
}

}  // namespace

std::vector<AnimationEntry> plan_context_animations(const NarrationScript& script,
                                                    const LabeledChart& chart) {
  if (script.context_sentences.size() < 2)
    raise(Errc::TooFewRows, "context narration must have two sentences");

  uint64_t hash = fnv1a(chart.doc.raw);
  int rotation = int(hash % 2);
  auto next_entrance = [&]() {
    Effect e = rotation % 2 == 0 ? Effect::FadeIn : Effect::Wipe;
    ++rotation;
    return e;
  };

  size_t s0_begin = script.sentence_word_offsets[0];
  size_t s1_begin = script.sentence_word_offsets[1];
  size_t s1_end = script.context_word_count;

  std::vector<AnimationEntry> entries;

  std::vector<int> titles = labeled_as(chart, "chart-title");
  if (!titles.empty()) {
    AnimationEntry e;
    e.target_selector = join_selectors(chart, titles);
    e.effect = next_entrance();
    e.phase = Phase::Entrance;
    e.word_begin = s0_begin;
    e.word_end = s1_begin;
    entries.push_back(e);
  }

  bool is_pie = !labeled_as(chart, "sector").empty();
  std::vector<int> legend = labeled_as(chart, "legend-symbol");
  {
    auto more = labeled_as(chart, "legend-label");
    legend.insert(legend.end(), more.begin(), more.end());
    more = labeled_as(chart, "legend-title");
    legend.insert(legend.end(), more.begin(), more.end());
    std::sort(legend.begin(), legend.end());
  }

  if (is_pie) {
    std::vector<int> targets = labeled_as(chart, "sector");
    targets.insert(targets.end(), legend.begin(), legend.end());
    std::sort(targets.begin(), targets.end());
    AnimationEntry e;
    e.target_selector = join_selectors(chart, targets);
    e.effect = next_entrance();
    e.phase = Phase::Entrance;
    e.word_begin = s1_begin;
    e.word_end = s1_end;
    if (!e.target_selector.empty()) entries.push_back(e);
    return entries;
  }

  // bar/line: split the encoding sentence at the "y-axis" and "legend"
  // marker words into x-axis, y-axis and legend intervals
  size_t y_marker = 0, legend_marker = 0;
  bool found_y = false, found_legend = false;
  for (size_t w = s1_begin; w < s1_end; ++w) {
    const std::string& t = script.words[w].text;
    if (!found_y && t.find("y-axis") != std::string::npos) {
      y_marker = w;
      found_y = true;
    }
    if (!found_legend && t.find("legend") != std::string::npos) {
      legend_marker = w;
      found_legend = true;
    }
  }
  bool has_legend_elements = !legend.empty();
  bool fallback = !found_y || (has_legend_elements && !found_legend);
  size_t x_end, y_end;
  if (!fallback) {
    x_end = y_marker;
    y_end = has_legend_elements ? legend_marker : s1_end;
  } else {
    size_t parts = has_legend_elements ? 3 : 2;
    size_t len = (s1_end - s1_begin) / parts;
    x_end = s1_begin + len;
    y_end = has_legend_elements ? s1_begin + 2 * len : s1_end;
  }

  std::vector<int> x_group, y_group;
  for (int idx : labeled_as(chart, "axis-line"))
    (wide(chart.doc.elements[size_t(idx)]) ? x_group : y_group).push_back(idx);
  for (int idx : labeled_as(chart, "tick"))
    (wide(chart.doc.elements[size_t(idx)]) ? y_group : x_group).push_back(idx);
  for (int idx : labeled_as(chart, "x-label")) x_group.push_back(idx);
  for (int idx : labeled_as(chart, "x-title")) x_group.push_back(idx);
  for (int idx : labeled_as(chart, "y-label")) y_group.push_back(idx);
  for (int idx : labeled_as(chart, "y-title")) y_group.push_back(idx);
  std::sort(x_group.begin(), x_group.end());
  std::sort(y_group.begin(), y_group.end());

  auto push_group = [&](const std::vector<int>& group, size_t begin, size_t end) {
    if (group.empty() || begin >= end) return;
    AnimationEntry e;
    e.target_selector = join_selectors(chart, group);
    if (e.target_selector.empty()) return;
    e.effect = next_entrance();
    e.phase = Phase::Entrance;
    e.word_begin = begin;
    e.word_end = end;
    if (fallback) e.params["fallback"] = "thirds";
    entries.push_back(e);
  };
  push_group(x_group, s1_begin, x_end);
  push_group(y_group, x_end, y_end);
  if (has_legend_elements) push_group(legend, y_end, s1_end);
  return entries;
}

namespace {

const std::vector<Effect>& effects_for(recovery::ChartKind kind) {
  static const std::vector<Effect> kBar = {Effect::ShowBox,   Effect::ShowText,
                                           Effect::ChangeColor, Effect::Highlight,
                                           Effect::BarBounce, Effect::ShowArrow,
                                           Effect::ShowCircle};
  static const std::vector<Effect> kLine = {Effect::ShowBox,     Effect::ShowText,
                                            Effect::ChangeColor, Effect::Highlight,
                                            Effect::ShowArrow,   Effect::ShowCircle};
  static const std::vector<Effect> kPie = {Effect::ShowBox, Effect::ShowText,
                                           Effect::ChangeColor, Effect::Highlight};
  switch (kind) {
    case recovery::ChartKind::Bar: return kBar;
    case recovery::ChartKind::Line: return kLine;
    case recovery::ChartKind::Pie: return kPie;
  }
  return kBar;
}

bool rows_match(const recovery::DataRow& row, const insights::RelDatum& d) {
  if (row.x != d.x) return false;
  if (d.series && row.series != d.series) return false;
  double scale = std::max({std::fabs(row.y), std::fabs(d.value), 1.0});
  return std::fabs(row.y - d.value) <= 1e-9 * scale;
}

}  // namespace

std::vector<AnimationEntry> plan_insight_animations(const NarrationScript& script,
                                                    const LabeledChart& chart,
                                                    const std::vector<insights::Insight>& distilled,
                                                    const recovery::DataTable& table,
                                                    std::vector<std::string>* warnings) {
  recovery::ChartKind kind = recovery::detect_chart_kind(chart);
  const std::vector<Effect>& effects = effects_for(kind);
  std::vector<recovery::MarkAnchor> anchors = recovery::mark_anchors(chart);

  std::vector<AnimationEntry> entries;
  size_t effect_cursor = 0;
  int anno_counter = 0;
  size_t context_sentence_count = script.context_sentences.size();

  for (const narration::InsightSentence& sentence : script.insight_sentences) {
    if (sentence.insight_index >= distilled.size()) continue;
    const insights::Insight& ins = distilled[sentence.insight_index];
    size_t overall_sentence = context_sentence_count + (&sentence - script.insight_sentences.data());
    size_t sentence_offset = script.sentence_word_offsets[overall_sentence];

    for (const narration::Phrase& phrase : sentence.phrases) {
      // anchor rows referenced by this insight
      std::vector<const recovery::MarkAnchor*> hit_anchors;
      std::set<int> hit_elements;
      for (const recovery::MarkAnchor& a : anchors) {
        if (a.row >= table.rows.size()) continue;
        for (const insights::RelDatum& d : ins.relevant) {
          if (insights::is_symbolic_x(d.x)) continue;
          if (rows_match(table.rows[a.row], d)) {
            hit_anchors.push_back(&a);
            hit_elements.insert(a.element);
            break;
          }
        }
      }
      if (hit_elements.empty()) {
        if (warnings)
          warnings->push_back(std::string("no relevant elements for insight '") +
                              insights::insight_type_name(ins.type) + "/" +
                              insights::sub_type_name(ins.sub) + "'; entry skipped");
        continue;
      }

      std::vector<int> targets(hit_elements.begin(), hit_elements.end());
      std::string selector = join_selectors(chart, targets);
      if (selector.empty()) continue;

      Effect effect = effects[effect_cursor % effects.size()];
      ++effect_cursor;

      size_t word_begin = sentence_offset + phrase.word_begin;
      size_t word_end = sentence_offset + phrase.word_end;

      svg::Point anchor = hit_anchors.front()->pos;
      AnimationEntry e;
      e.target_selector = selector;
      e.effect = effect;
      e.phase = Phase::Emphasis;
      e.word_begin = word_begin;
      e.word_end = word_end;

      switch (effect) {
        case Effect::ShowBox: {
          double x0 = 1e18, y0 = 1e18, x1 = -1e18, y1 = -1e18;
          for (int idx : targets) {
            svg::Rect b = svg::element_bbox(chart.doc.elements[size_t(idx)]);
            x0 = std::min(x0, b.x);
            y0 = std::min(y0, b.y);
            x1 = std::max(x1, b.x + b.w);
            y1 = std::max(y1, b.y + b.h);
          }
          e.params["x"] = fmt_num(x0 - kBoxPadding);
          e.params["y"] = fmt_num(y0 - kBoxPadding);
          e.params["w"] = fmt_num(x1 - x0 + 2 * kBoxPadding);
          e.params["h"] = fmt_num(y1 - y0 + 2 * kBoxPadding);
          e.params["anno"] = "anno-" + std::to_string(anno_counter++);
          break;
        }
        case Effect::ShowText: {
          double value = 0;
          for (const insights::RelDatum& d : ins.relevant)
            if (!insights::is_symbolic_x(d.x)) {
              value = d.value;
              break;
            }
          e.params["x"] = fmt_num(anchor.x);
          e.params["y"] = fmt_num(anchor.y - 10);
          e.params["text"] = narration::fmt_value(value);
          e.params["anno"] = "anno-" + std::to_string(anno_counter++);
          break;
        }
        case Effect::ShowArrow: {
          e.params["x1"] = fmt_num(anchor.x - kArrowLength);
          e.params["y1"] = fmt_num(anchor.y - kArrowLength);
          e.params["x2"] = fmt_num(anchor.x - 4);
          e.params["y2"] = fmt_num(anchor.y - 4);
          e.params["anno"] = "anno-" + std::to_string(anno_counter++);
          break;
        }
        case Effect::ChangeColor: {
          const svg::SvgElement& first = chart.doc.elements[size_t(targets.front())];
          e.params["channel"] = first.fill ? "fill" : "stroke";
          break;
        }
        case Effect::ShowCircle: {
          bool has_circle = false;
          for (int idx : targets)
            if (chart.doc.elements[size_t(idx)].kind == svg::ElemKind::Circle) has_circle = true;
          if (has_circle) break;  // pulse the existing dots
          // no point elements: synthesize the circle as an entrance-exit pair
          std::string anno = "anno-" + std::to_string(anno_counter++);
          AnimationEntry enter = e;
          enter.effect = Effect::FadeIn;
          enter.phase = Phase::Entrance;
          enter.word_end = std::min(word_begin + 1, word_end);
          enter.params["synth"] = "circle";
          enter.params["cx"] = fmt_num(anchor.x);
          enter.params["cy"] = fmt_num(anchor.y);
          enter.params["r"] = fmt_num(kAnnoCircleRadius);
          enter.params["anno"] = anno;
          AnimationEntry exit = enter;
          exit.effect = Effect::FadeOut;
          exit.phase = Phase::Exit;
          exit.word_begin = std::max(word_end - 1, word_begin);
          exit.word_end = word_end;
          entries.push_back(enter);
          entries.push_back(exit);
          continue;
        }
        default:
          break;
      }
      entries.push_back(e);
    }
  }
  return entries;
}

void resolve_intervals(AnimationPlan& plan, const NarrationScript& script) {
  if (script.timings.size() != script.words.size() || script.words.empty())
    raise(Errc::MissingTimings, "script has no word timings");
  for (AnimationEntry& e : plan.entries) {
    if (e.word_begin >= e.word_end || e.word_end > script.words.size())
      raise(Errc::MissingTimings, "word interval out of range");
    e.time_ms = {script.timings[e.word_begin].start_ms, script.timings[e.word_end - 1].end_ms};
  }
  std::stable_sort(plan.entries.begin(), plan.entries.end(),
                   [](const AnimationEntry& a, const AnimationEntry& b) {
                     return a.time_ms->first < b.time_ms->first;
                   });
}

// --- rendering -------------------------------------------------------------------

namespace {

constexpr const char* kHeaderComment = "<!-- chartrevive live v1 -->\n";

std::set<std::string> collect_ids(const std::string& svg_text) {
  std::set<std::string> ids;
  size_t pos = 0;
  while ((pos = svg_text.find(" id=\"", pos)) != std::string::npos) {
    pos += 5;
    size_t end = svg_text.find('"', pos);
    if (end == std::string::npos) break;
    ids.insert(svg_text.substr(pos, end - pos));
    pos = end + 1;
  }
  return ids;
}

std::vector<std::string> split_selector(const std::string& selector) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < selector.size()) {
    while (i < selector.size() && (selector[i] == ' ' || selector[i] == ',')) ++i;
    size_t start = i;
    while (i < selector.size() && selector[i] != ',') ++i;
    size_t end = i;
    while (end > start && selector[end - 1] == ' ') --end;
    if (end > start) out.push_back(selector.substr(start, end - start));
  }
  return out;
}

std::string keyframes_for(const AnimationEntry& e, const std::string& name) {
  std::string k = "@keyframes " + name + " { ";
  switch (e.effect) {
    case Effect::FadeIn:
      k += "from { opacity: 0; } to { opacity: 1; }";
      break;
    case Effect::Wipe:
      k += "from { opacity: 1; clip-path: inset(0 100% 0 0); } "
           "to { opacity: 1; clip-path: inset(0 0 0 0); }";
      break;
    case Effect::FadeOut:
      k += "from { opacity: 1; } to { opacity: 0; }";
      break;
    case Effect::ShowBox:
    case Effect::ShowText:
    case Effect::ShowArrow:
      k += "0% { opacity: 0; } 12% { opacity: 1; } 88% { opacity: 1; } 100% { opacity: 0; }";
      break;
    case Effect::ChangeColor: {
      std::string channel = e.params.count("channel") ? e.params.at("channel") : "fill";
      k += "50% { " + channel + ": " + kHighlightColor + "; }";
      break;
    }
    case Effect::Highlight:
      k += std::string("50% { stroke: ") + kHighlightColor + "; stroke-width: 3; }";
      break;
    case Effect::BarBounce:
      k += "0% { transform: translateY(0); } 30% { transform: translateY(-6px); } "
           "60% { transform: translateY(0); } 80% { transform: translateY(-3px); } "
           "100% { transform: translateY(0); }";
      break;
    case Effect::ShowCircle:
      k += "50% { transform: scale(1.6); }";
      break;
  }
  return k + " }\n";
}

std::string annotation_markup(const AnimationEntry& e, const std::string& anno_id) {
  switch (e.effect) {
    case Effect::ShowBox:
      return "  <rect id=\"" + anno_id + "\" x=\"" + e.params.at("x") + "\" y=\"" +
             e.params.at("y") + "\" width=\"" + e.params.at("w") + "\" height=\"" +
             e.params.at("h") +
             "\" fill=\"none\" stroke=\"#ff5252\" stroke-width=\"1.5\" "
             "stroke-dasharray=\"4 3\" opacity=\"0\"/>\n";
    case Effect::ShowText:
      return "  <text id=\"" + anno_id + "\" x=\"" + e.params.at("x") + "\" y=\"" +
             e.params.at("y") +
             "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#d32f2f\" opacity=\"0\">" +
             e.params.at("text") + "</text>\n";
    case Effect::ShowArrow: {
      const std::string &x1 = e.params.at("x1"), &y1 = e.params.at("y1"),
                        &x2 = e.params.at("x2"), &y2 = e.params.at("y2");
      double bx = std::strtod(x2.c_str(), nullptr);
      double by = std::strtod(y2.c_str(), nullptr);
      std::string hx1 = fmt_num(bx - 7), hy1 = fmt_num(by - 2);
      std::string hx2 = fmt_num(bx - 2), hy2 = fmt_num(by - 7);
      return "  <path id=\"" + anno_id + "\" d=\"M" + x1 + " " + y1 + " L" + x2 + " " + y2 +
             " M" + hx1 + " " + hy1 + " L" + x2 + " " + y2 + " L" + hx2 + " " + hy2 +
             "\" fill=\"none\" stroke=\"#d32f2f\" stroke-width=\"2\" opacity=\"0\"/>\n";
    }
    default:  // synthesized circle
      return "  <circle id=\"" + anno_id + "\" cx=\"" + e.params.at("cx") + "\" cy=\"" +
             e.params.at("cy") + "\" r=\"" + e.params.at("r") +
             "\" fill=\"none\" stroke=\"#d32f2f\" stroke-width=\"2\" opacity=\"0\"/>\n";
  }
}

}  // namespace

std::string render_animated_svg(const std::string& labeled_svg, const AnimationPlan& plan) {
  std::string body = labeled_svg;
  bool has_header = body.rfind(kHeaderComment, 0) == 0;

  if (plan.entries.empty()) return has_header ? body : kHeaderComment + body;

  std::set<std::string> ids = collect_ids(labeled_svg);

  // map each entry to the nodes its animation runs on
  struct NodeState {
    std::vector<std::string> anims;
    bool pre_hide = false;
    bool transform_box = false;
  };
  std::vector<std::string> node_order;
  std::map<std::string, NodeState> nodes;
  std::string keyframes;
  std::string annotations;
  std::set<std::string> emitted_annos;

  auto node_state = [&](const std::string& key) -> NodeState& {
    if (!nodes.count(key)) node_order.push_back(key);
    return nodes[key];
  };

  for (size_t k = 0; k < plan.entries.size(); ++k) {
    const AnimationEntry& e = plan.entries[k];
    if (!e.time_ms) raise(Errc::MissingTimings, "plan entry " + std::to_string(k) + " unresolved");
    std::string name = "anim-" + std::to_string(k);

    bool annotated = e.params.count("anno") > 0;
    std::vector<std::string> selectors = split_selector(e.target_selector);
    if (selectors.empty())
      raise(Errc::SelectorMiss, "entry " + std::to_string(k) + " has no selector");
    for (const std::string& sel : selectors) {
      if (sel.empty() || sel[0] != '#' || !ids.count(sel.substr(1)))
        raise(Errc::SelectorMiss, "selector '" + sel + "' matches nothing");
    }

    double start = e.time_ms->first;
    double dur = std::max(1.0, e.time_ms->second - e.time_ms->first);
    bool keeps_state = e.phase != Phase::Emphasis;
    std::string anim = name + " " + fmt_num(dur) + "ms linear " + fmt_num(start) + "ms 1 normal " +
                       (keeps_state ? "forwards" : "none");

    keyframes += keyframes_for(e, name);

    if (annotated) {
      const std::string& anno_id = e.params.at("anno");
      if (!emitted_annos.count(anno_id)) {
        annotations += annotation_markup(e, anno_id);
        emitted_annos.insert(anno_id);
      }
      node_state("#" + anno_id).anims.push_back(anim);
    } else {
      for (const std::string& sel : selectors) {
        NodeState& st = node_state(sel);
        st.anims.push_back(anim);
        if (e.phase == Phase::Entrance) st.pre_hide = true;
        if (e.effect == Effect::ShowCircle || e.effect == Effect::BarBounce)
          st.transform_box = true;
      }
    }
  }

  std::string style = "  <style>\n";
  for (const std::string& key : node_order) {
    const NodeState& st = nodes[key];
    style += "    " + key + " { ";
    if (st.pre_hide) style += "opacity: 0; ";
    if (st.transform_box) style += "transform-box: fill-box; transform-origin: center; ";
    style += "animation: ";
    for (size_t a = 0; a < st.anims.size(); ++a) {
      if (a) style += ", ";
      style += st.anims[a];
    }
    style += "; }\n";
  }
  style += keyframes;
  style += "  </style>\n";

  size_t close = body.rfind("</svg>");
  if (close == std::string::npos) raise(Errc::MalformedXml, "labeled svg has no closing tag");
  std::string out = body.substr(0, close);
  out += style;
  out += annotations;
  out += body.substr(close);
  return has_header ? out : kHeaderComment + out;
}

// --- serialization ------------------------------------------------------------------

std::string plan_json(const AnimationPlan& plan) {
  nlohmann::ordered_json j;
  j["entries"] = nlohmann::json::array();
  for (const AnimationEntry& e : plan.entries) {
    nlohmann::ordered_json entry;
    entry["target"] = e.target_selector;
    entry["effect"] = effect_name(e.effect);
    entry["phase"] = phase_name(e.phase);
    entry["wordInterval"] = {e.word_begin, e.word_end};
    if (e.time_ms) entry["timeMs"] = {e.time_ms->first, e.time_ms->second};
    entry["params"] = e.params;
    j["entries"].push_back(entry);
  }
  j["warnings"] = plan.warnings;
  return j.dump(2);
}

AnimationPlan plan_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::IoError, std::string("bad plan json: ") + e.what());
  }
  AnimationPlan plan;
  for (const auto& entry : j.at("entries")) {
    AnimationEntry e;
    e.target_selector = entry.at("target").get<std::string>();
    e.effect = effect_from_name(entry.at("effect").get<std::string>());
    e.phase = phase_from_name(entry.at("phase").get<std::string>());
    e.word_begin = entry.at("wordInterval")[0].get<size_t>();
    e.word_end = entry.at("wordInterval")[1].get<size_t>();
    if (entry.contains("timeMs"))
      e.time_ms = {entry.at("timeMs")[0].get<double>(), entry.at("timeMs")[1].get<double>()};
    if (entry.contains("params"))
      e.params = entry.at("params").get<std::map<std::string, std::string>>();
    plan.entries.push_back(e);
  }
  if (j.contains("warnings")) plan.warnings = j.at("warnings").get<std::vector<std::string>>();
  return plan;
}

}  // namespace chartrevive::animation
