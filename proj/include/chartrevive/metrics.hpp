#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chartrevive/svg.hpp"

namespace chartrevive::metrics {

struct Detection {
  int chart_id = 0;
  svg::Rect bbox;
  int class_id = 0;
  double confidence = 0;
};

struct GroundTruthBox {
  int chart_id = 0;
  svg::Rect bbox;
  int class_id = 0;
};

double iou(const svg::Rect& a, const svg::Rect& b);

// COCO-style all-points-interpolated AP for one class at one IOU threshold.
// Returns nullopt when the class has no ground truth.
std::optional<double> average_precision(const std::vector<Detection>& dets,
                                        const std::vector<GroundTruthBox>& gts, int class_id,
                                        double iou_threshold);

struct MapReport {
  double ap50 = 0;
  double ap75 = 0;
  double map = 0;
};

MapReport map_over_thresholds(const std::vector<Detection>& dets,
                              const std::vector<GroundTruthBox>& gts);

// Per-class breakdown plus overall numbers, serializable as the evaluation
// report. Class ids index into `class_names`.
struct EvalReport {
  std::map<std::string, MapReport> per_class;
  MapReport overall;
  size_t detections = 0;
  size_t ground_truths = 0;
};

EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts,
                    const std::vector<std::string>& class_names);

std::string report_json(const EvalReport& r);

}  // namespace chartrevive::metrics
