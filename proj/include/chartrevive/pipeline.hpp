#pragma once

#include <map>
#include <string>
#include <vector>

#include "chartrevive/animation.hpp"
#include "chartrevive/datagen.hpp"
#include "chartrevive/insights.hpp"
#include "chartrevive/metrics.hpp"
#include "chartrevive/narration.hpp"
#include "chartrevive/neural.hpp"
#include "chartrevive/recovery.hpp"

namespace chartrevive::pipeline {

struct PipelineConfig {
  std::string weights_path;
  std::string taxonomy_path;  // empty -> built-in default taxonomy
  std::string timings_path;   // optional external word timings
  narration::TimingModel timing;
  insights::Thresholds thresholds;
  int max_distilled = 2;
  std::string out_dir = ".";
  uint64_t seed = 0;
};

PipelineConfig config_from_json(const std::string& text);

// In-memory revive result; write_bundle puts the seven files on disk.
struct ReviveBundle {
  std::string labeled_svg;
  std::string insights_json;
  std::string narration_json;
  std::string narration_vtt;
  std::string plan_json;
  std::string live_svg;
  std::string report_json;
};

// Runs parse -> graph -> classify -> recover -> insights -> narration ->
// plan -> render. Throws Error tagged with the failing stage; report_out,
// when given, is filled even on failure.
ReviveBundle revive(const std::string& input_svg, const PipelineConfig& config,
                    neural::ModelWeights& weights, std::string* report_out = nullptr);

void write_bundle(const ReviveBundle& bundle, const std::string& out_dir);

// Labels encoded in a labeled SVG's class attributes ("<primary> <sub>").
std::map<int, std::string> labels_from_classes(const svg::SvgDocument& doc);

narration::ChartMeta meta_from_chart(const recovery::LabeledChart& chart,
                                     const recovery::DataTable& table);

// Dataset plumbing shared by train/eval and the acceptance suite.
std::vector<neural::TrainSample> load_split(const std::string& dataset_dir,
                                            const datagen::Manifest& manifest,
                                            const std::string& split,
                                            const recovery::Taxonomy& tax);

struct EvalData {
  std::vector<metrics::Detection> detections;
  std::vector<metrics::GroundTruthBox> ground_truths;
};

// Classifier predictions over a split, expressed as detections sitting on
// the ground-truth element boxes.
EvalData evaluate_split(const std::string& dataset_dir, const datagen::Manifest& manifest,
                        const std::string& split, neural::ModelWeights& weights,
                        const recovery::Taxonomy& tax);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace chartrevive::pipeline
