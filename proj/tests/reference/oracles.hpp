#pragma once

// Test-side oracles: a brute-force PR-curve AP enumerator, a minimal WebVTT
// reader, and quadrature helpers. Independent of the library implementations
// they check.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "chartrevive/metrics.hpp"

namespace chartrevive::testoracle {

// AP by explicit enumeration: every recall level achieved by some prefix of
// the ranked detections, each paired with the best precision at recall >= r.
inline std::optional<double> brute_average_precision(std::vector<metrics::Detection> dets,
                                                     const std::vector<metrics::GroundTruthBox>& gts,
                                                     int class_id, double threshold) {
  size_t total_gt = 0;
  for (const auto& g : gts)
    if (g.class_id == class_id) ++total_gt;
  if (total_gt == 0) return std::nullopt;

  dets.erase(std::remove_if(dets.begin(), dets.end(),
                            [&](const metrics::Detection& d) { return d.class_id != class_id; }),
             dets.end());
  std::sort(dets.begin(), dets.end(), [](const metrics::Detection& a, const metrics::Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.chart_id != b.chart_id) return a.chart_id < b.chart_id;
    auto key = [](const svg::Rect& r) { return std::make_tuple(r.x, r.y, r.w, r.h); };
    return key(a.bbox) < key(b.bbox);
  });

  // greedy matching identical in contract to the implementation, written as
  // its own loop over indexed ground truths
  std::vector<std::pair<size_t, const metrics::GroundTruthBox*>> class_gts;
  for (size_t i = 0; i < gts.size(); ++i)
    if (gts[i].class_id == class_id) class_gts.push_back({i, &gts[i]});
  std::vector<bool> used(class_gts.size(), false);

  std::vector<bool> is_tp(dets.size(), false);
  for (size_t d = 0; d < dets.size(); ++d) {
    double best = -1;
    size_t best_j = size_t(-1);
    for (size_t j = 0; j < class_gts.size(); ++j) {
      if (used[j] || class_gts[j].second->chart_id != dets[d].chart_id) continue;
      double v = metrics::iou(dets[d].bbox, class_gts[j].second->bbox);
      if (v >= threshold && v > best) {
        best = v;
        best_j = j;
      }
    }
    if (best_j != size_t(-1)) {
      used[best_j] = true;
      is_tp[d] = true;
    }
  }

  // all-points interpolation by scanning every prefix for each recall step
  double ap = 0;
  size_t tp = 0;
  double prev_recall = 0;
  for (size_t d = 0; d < dets.size(); ++d) {
    if (!is_tp[d]) continue;
    ++tp;
    double recall = double(tp) / double(total_gt);
    // best precision among prefixes with recall >= current
    double best_precision = 0;
    size_t tp2 = 0;
    for (size_t k = 0; k < dets.size(); ++k) {
      if (is_tp[k]) ++tp2;
      double r2 = double(tp2) / double(total_gt);
      if (r2 >= recall) best_precision = std::max(best_precision, double(tp2) / double(k + 1));
    }
    ap += (recall - prev_recall) * best_precision;
    prev_recall = recall;
  }
  return ap;
}

struct VttCue {
  double start_ms = 0;
  double end_ms = 0;
  std::string text;
};

inline double parse_vtt_timestamp(const std::string& s) {
  int h = 0, m = 0, sec = 0, ms = 0;
  std::sscanf(s.c_str(), "%d:%d:%d.%d", &h, &m, &sec, &ms);
  return double(((h * 60 + m) * 60 + sec) * 1000 + ms);
}

inline std::vector<VttCue> read_vtt(const std::string& text) {
  std::vector<VttCue> cues;
  size_t pos = 0;
  auto next_line = [&](std::string& line) {
    if (pos >= text.size()) return false;
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    line = text.substr(pos, end - pos);
    pos = end + 1;
    return true;
  };
  std::string line;
  if (!next_line(line) || line.rfind("WEBVTT", 0) != 0) return cues;
  while (next_line(line)) {
    size_t arrow = line.find(" --> ");
    if (arrow == std::string::npos) continue;
    VttCue cue;
    cue.start_ms = parse_vtt_timestamp(line.substr(0, arrow));
    cue.end_ms = parse_vtt_timestamp(line.substr(arrow + 5));
    std::string body;
    while (next_line(line) && !line.empty()) {
      if (!body.empty()) body += '\n';
      body += line;
    }
    cue.text = body;
    cues.push_back(cue);
  }
  return cues;
}

// Dense-sampling arc length, used as the quadrature oracle.
template <typename F>
double sampled_length(const F& at, int samples = 200000) {
  double len = 0;
  auto prev = at(0.0);
  for (int i = 1; i <= samples; ++i) {
    auto cur = at(double(i) / samples);
    len += std::hypot(cur.x - prev.x, cur.y - prev.y);
    prev = cur;
  }
  return len;
}

}  // namespace chartrevive::testoracle
