#include "chartrevive/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace chartrevive::metrics {

double iou(const svg::Rect& a, const svg::Rect& b) {
  double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  double inter = ix * iy;
  double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

namespace {

bool det_order(const Detection& a, const Detection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.chart_id != b.chart_id) return a.chart_id < b.chart_id;
  auto key = [](const svg::Rect& r) { return std::tie(r.x, r.y, r.w, r.h); };
  return key(a.bbox) < key(b.bbox);
}

}  // namespace

std::optional<double> average_precision(const std::vector<Detection>& dets,
                                        const std::vector<GroundTruthBox>& gts, int class_id,
                                        double iou_threshold) {
  std::vector<const GroundTruthBox*> class_gts;
  for (const auto& g : gts)
    if (g.class_id == class_id) class_gts.push_back(&g);
  if (class_gts.empty()) return std::nullopt;

  std::vector<Detection> class_dets;
  for (const auto& d : dets)
    if (d.class_id == class_id) class_dets.push_back(d);
  std::sort(class_dets.begin(), class_dets.end(), det_order);

  std::vector<bool> gt_used(class_gts.size(), false);
  std::vector<int> tp(class_dets.size(), 0);
  for (size_t i = 0; i < class_dets.size(); ++i) {
    double best_iou = -1;
    int best_gt = -1;
    for (size_t j = 0; j < class_gts.size(); ++j) {
      if (gt_used[j] || class_gts[j]->chart_id != class_dets[i].chart_id) continue;
      double v = iou(class_dets[i].bbox, class_gts[j]->bbox);
      if (v >= iou_threshold && v > best_iou) {
        best_iou = v;
        best_gt = int(j);
      }
    }
    if (best_gt >= 0) {
      gt_used[size_t(best_gt)] = true;
      tp[i] = 1;
    }
  }

  // precision-recall points, then area under the precision envelope
  size_t total_gt = class_gts.size();
  std::vector<double> precision(class_dets.size()), recall(class_dets.size());
  int cum_tp = 0;
  for (size_t i = 0; i < class_dets.size(); ++i) {
    cum_tp += tp[i];
    precision[i] = double(cum_tp) / double(i + 1);
    recall[i] = double(cum_tp) / double(total_gt);
  }

  double ap = 0;
  double prev_recall = 0;
  double env = 0;
  // walk from the end so the envelope is the running max of precision
  std::vector<double> envelope(class_dets.size());
  for (size_t i = class_dets.size(); i-- > 0;) {
    env = std::max(env, precision[i]);
    envelope[i] = env;
  }
  for (size_t i = 0; i < class_dets.size(); ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * envelope[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

namespace {

std::vector<int> class_ids_with_gt(const std::vector<GroundTruthBox>& gts) {
  std::vector<int> ids;
  for (const auto& g : gts) ids.push_back(g.class_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

double mean_ap_at(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                  const std::vector<int>& classes, double threshold) {
  double sum = 0;
  int n = 0;
  for (int c : classes) {
    if (auto ap = average_precision(dets, gts, c, threshold)) {
      sum += *ap;
      ++n;
    }
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace

MapReport map_over_thresholds(const std::vector<Detection>& dets,
                              const std::vector<GroundTruthBox>& gts) {
  std::vector<int> classes = class_ids_with_gt(gts);
  MapReport r;
  r.ap50 = mean_ap_at(dets, gts, classes, 0.50);
  r.ap75 = mean_ap_at(dets, gts, classes, 0.75);
  double sum = 0;
  for (int k = 0; k < 10; ++k) sum += mean_ap_at(dets, gts, classes, 0.50 + 0.05 * k);
  r.map = sum / 10.0;
  return r;
}

EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                    const std::vector<std::string>& class_names) {
  EvalReport report;
  report.detections = dets.size();
  report.ground_truths = gts.size();
  report.overall = map_over_thresholds(dets, gts);
  for (int c : class_ids_with_gt(gts)) {
    MapReport r;
    if (auto ap = average_precision(dets, gts, c, 0.50)) r.ap50 = *ap;
    if (auto ap = average_precision(dets, gts, c, 0.75)) r.ap75 = *ap;
    double sum = 0;
    for (int k = 0; k < 10; ++k)
      if (auto ap = average_precision(dets, gts, c, 0.50 + 0.05 * k)) sum += *ap;
    r.map = sum / 10.0;
    std::string name = (c >= 0 && size_t(c) < class_names.size()) ? class_names[size_t(c)]
                                                                  : ("class-" + std::to_string(c));
    report.per_class[name] = r;
  }
  return report;
}

std::string report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  auto block = [](const MapReport& m) {
    nlohmann::ordered_json b;
    b["ap50"] = m.ap50;
    b["ap75"] = m.ap75;
    b["map"] = m.map;
    return b;
  };
  j["per_class"] = nlohmann::ordered_json::object();
  for (const auto& [name, m] : r.per_class) j["per_class"][name] = block(m);
  j["overall"] = block(r.overall);
  j["counts"] = {{"detections", r.detections}, {"groundTruths", r.ground_truths}};
  return j.dump(2);
}

}  // namespace chartrevive::metrics
