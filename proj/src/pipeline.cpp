#include "chartrevive/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "chartrevive/error.hpp"
#include "chartrevive/graph.hpp"

namespace chartrevive::pipeline {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::IoError, "cannot write " + path);
  out << content;
}

PipelineConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::IoError, std::string("bad config json: ") + e.what());
  }
  PipelineConfig c;
  c.weights_path = j.value("weights", "");
  c.taxonomy_path = j.value("taxonomy", "");
  c.timings_path = j.value("timings", "");
  c.out_dir = j.value("out", ".");
  c.seed = j.value("seed", uint64_t(0));
  c.max_distilled = j.value("maxDistilled", 2);
  if (j.contains("timing")) {
    const auto& t = j["timing"];
    c.timing.base_ms_per_word = t.value("baseMsPerWord", c.timing.base_ms_per_word);
    c.timing.per_char_ms = t.value("perCharMs", c.timing.per_char_ms);
    c.timing.sentence_pause_ms = t.value("sentencePauseMs", c.timing.sentence_pause_ms);
  }
  if (j.contains("thresholds")) {
    const auto& t = j["thresholds"];
    c.thresholds.trend_slope = t.value("trendSlope", c.thresholds.trend_slope);
    c.thresholds.r2_strong = t.value("r2Strong", c.thresholds.r2_strong);
    c.thresholds.r2_weak = t.value("r2Weak", c.thresholds.r2_weak);
    c.thresholds.tukey_k = t.value("tukeyK", c.thresholds.tukey_k);
    c.thresholds.uniform_spread = t.value("uniformSpread", c.thresholds.uniform_spread);
    c.thresholds.skew_bound = t.value("skewBound", c.thresholds.skew_bound);
    c.thresholds.kurtosis_bound = t.value("kurtosisBound", c.thresholds.kurtosis_bound);
    c.thresholds.majority_share = t.value("majorityShare", c.thresholds.majority_share);
  }
  return c;
}

std::map<int, std::string> labels_from_classes(const svg::SvgDocument& doc) {
  std::map<int, std::string> labels;
  for (const svg::SvgElement& e : doc.elements) {
    if (!e.class_attr) continue;
    const std::string& cls = *e.class_attr;
    size_t space = cls.find(' ');
    if (space == std::string::npos) continue;
    labels[e.index] = cls.substr(space + 1);
  }
  return labels;
}

narration::ChartMeta meta_from_chart(const recovery::LabeledChart& chart,
                                     const recovery::DataTable& table) {
  narration::ChartMeta meta;
  auto first_text = [&](const char* sub) -> std::string {
    for (const auto& [idx, name] : chart.labels)
      if (name == sub) {
        const std::string& t = chart.doc.elements[size_t(idx)].text.content;
        if (!t.empty()) return t;
      }
    return "None";
  };
  meta.title = first_text("chart-title");
  meta.x_title = table.x_name;
  meta.y_title = table.y_name;
  meta.legend_title = table.legend_name;
  std::set<std::string> entries;
  for (const auto& [idx, name] : chart.labels)
    if (name == "legend-label") entries.insert(chart.doc.elements[size_t(idx)].text.content);
  meta.legend_entries = entries.size();
  return meta;
}

namespace {

struct StageClock {
  std::vector<std::pair<std::string, double>> stages;
  std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();

  void lap(const std::string& name) {
    auto now = std::chrono::steady_clock::now();
    stages.push_back({name, std::chrono::duration<double, std::milli>(now - mark).count()});
    mark = now;
  }
};

std::string report_text(const StageClock& clock, const std::vector<std::string>& warnings,
                        uint64_t seed, const std::string& failed_stage,
                        const std::string& error) {
  nlohmann::ordered_json j;
  j["ok"] = failed_stage.empty();
  j["seed"] = seed;
  j["stages"] = nlohmann::json::array();
  for (const auto& [name, ms] : clock.stages) j["stages"].push_back({{"name", name}, {"ms", ms}});
  j["warnings"] = warnings;
  if (!failed_stage.empty()) {
    j["failedStage"] = failed_stage;
    j["error"] = error;
  }
  return j.dump(2);
}

}  // namespace

ReviveBundle revive(const std::string& input_svg, const PipelineConfig& config,
                    neural::ModelWeights& weights, std::string* report_out) {
  ReviveBundle bundle;
  StageClock clock;
  std::vector<std::string> warnings;
  std::string stage = "parse";

  try {
    svg::SvgDocument doc = svg::parse_svg(input_svg);
    clock.lap("parse");

    stage = "graph";
    graph::ChartGraph g = graph::build_graph(doc);
    clock.lap("graph");

    stage = "classify";
    std::vector<neural::Prediction> preds = neural::predict(g, weights);
    std::map<int, std::string> labels;
    for (const neural::Prediction& p : preds)
      labels[p.element] = weights.taxonomy[size_t(p.class_id)];
    clock.lap("classify");

    stage = "recover";
    recovery::Taxonomy tax = config.taxonomy_path.empty()
                                 ? recovery::Taxonomy::default_taxonomy()
                                 : recovery::Taxonomy::from_json(read_file(config.taxonomy_path));
    recovery::LabeledChart chart = recovery::label_chart(doc, labels);
    recovery::ChartKind kind = recovery::detect_chart_kind(chart);
    recovery::DataTable table = recovery::recover_data(chart);
    bundle.labeled_svg = recovery::emit_labeled_svg(chart, table, tax);
    // downstream stages address elements in the labeled document
    chart.doc = svg::parse_svg(bundle.labeled_svg);
    clock.lap("recover");

    stage = "insights";
    std::vector<insights::Insight> all = insights::compute_insights(table, config.thresholds);
    std::vector<insights::Insight> distilled = insights::distill(all, kind, config.max_distilled);
    bundle.insights_json = insights::insights_json(all, distilled);
    clock.lap("insights");

    stage = "narration";
    narration::ChartMeta meta = meta_from_chart(chart, table);
    std::vector<std::string> context = narration::context_narration(meta, kind);
    std::vector<narration::InsightSentence> insight_sentences =
        narration::insight_narration(distilled);
    narration::NarrationScript script =
        narration::assemble(context, std::move(insight_sentences), config.timing);
    if (!config.timings_path.empty())
      script = narration::ingest_timings(script, read_file(config.timings_path));
    bundle.narration_json = narration::script_json(script);
    bundle.narration_vtt = narration::export_vtt(script);
    clock.lap("narration");

    stage = "plan";
    animation::AnimationPlan plan;
    plan.entries = animation::plan_context_animations(script, chart);
    std::vector<animation::AnimationEntry> insight_entries =
        animation::plan_insight_animations(script, chart, distilled, table, &plan.warnings);
    plan.entries.insert(plan.entries.end(), insight_entries.begin(), insight_entries.end());
    animation::resolve_intervals(plan, script);
    bundle.plan_json = animation::plan_json(plan);
    warnings = plan.warnings;
    clock.lap("plan");

    stage = "render";
    bundle.live_svg = animation::render_animated_svg(bundle.labeled_svg, plan);
    clock.lap("render");

    bundle.report_json = report_text(clock, warnings, config.seed, "", "");
    if (report_out) *report_out = bundle.report_json;
    return bundle;
  } catch (const Error& e) {
    std::string report = report_text(clock, warnings, config.seed, stage, e.what());
    if (report_out) *report_out = report;
    throw Error(e.code(), "stage '" + stage + "': " + e.what());
  }
}

void write_bundle(const ReviveBundle& bundle, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  write_file(out_dir + "/labeled.svg", bundle.labeled_svg);
  write_file(out_dir + "/insights.json", bundle.insights_json);
  write_file(out_dir + "/narration.json", bundle.narration_json);
  write_file(out_dir + "/narration.vtt", bundle.narration_vtt);
  write_file(out_dir + "/plan.json", bundle.plan_json);
  write_file(out_dir + "/live.svg", bundle.live_svg);
  write_file(out_dir + "/report.json", bundle.report_json);
}

std::vector<neural::TrainSample> load_split(const std::string& dataset_dir,
                                            const datagen::Manifest& manifest,
                                            const std::string& split,
                                            const recovery::Taxonomy& tax) {
  std::vector<const datagen::ManifestEntry*> wanted;
  for (const datagen::ManifestEntry& e : manifest.charts)
    if (split.empty() || e.split == split) wanted.push_back(&e);

  std::vector<neural::TrainSample> samples(wanted.size());
  std::string first_error;

#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < wanted.size(); ++i) {
    try {
      const datagen::ManifestEntry& e = *wanted[i];
      std::string svg_text = read_file(dataset_dir + "/" + e.path);
      std::string stem = e.path.substr(0, e.path.size() - 4);
      datagen::GroundTruth gt =
          datagen::ground_truth_from_json(read_file(dataset_dir + "/" + stem + ".truth.json"));

      svg::SvgDocument doc = svg::parse_svg(svg_text);
      neural::TrainSample s;
      s.graph = graph::build_graph(doc);
      s.labels.assign(doc.elements.size(), -1);
      for (const auto& [idx, name] : gt.labels) {
        int cls = tax.index_of(name);
        if (cls < 0) raise(Errc::LabelOutOfRange, "label '" + name + "' not in taxonomy");
        if (idx < 0 || size_t(idx) >= s.labels.size())
          raise(Errc::LabelOutOfRange, "label index out of range in " + e.path);
        s.labels[size_t(idx)] = cls;
      }
      samples[i] = std::move(s);
    } catch (const std::exception& ex) {
#pragma omp critical
      if (first_error.empty()) first_error = ex.what();
    }
  }
  if (!first_error.empty()) raise(Errc::IoError, "loading split failed: " + first_error);
  return samples;
}

EvalData evaluate_split(const std::string& dataset_dir, const datagen::Manifest& manifest,
                        const std::string& split, neural::ModelWeights& weights,
                        const recovery::Taxonomy& tax) {
  std::vector<const datagen::ManifestEntry*> wanted;
  for (const datagen::ManifestEntry& e : manifest.charts)
    if (split.empty() || e.split == split) wanted.push_back(&e);

  std::vector<EvalData> shards(wanted.size());
  std::string first_error;

#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < wanted.size(); ++i) {
    try {
      const datagen::ManifestEntry& e = *wanted[i];
      std::string svg_text = read_file(dataset_dir + "/" + e.path);
      std::string stem = e.path.substr(0, e.path.size() - 4);
      datagen::GroundTruth gt =
          datagen::ground_truth_from_json(read_file(dataset_dir + "/" + stem + ".truth.json"));

      svg::SvgDocument doc = svg::parse_svg(svg_text);
      graph::ChartGraph g = graph::build_graph(doc);
      std::vector<neural::Prediction> preds = neural::predict(g, weights);

      EvalData& shard = shards[i];
      int chart_id = int(i);
      for (const auto& [idx, name] : gt.labels) {
        int cls = tax.index_of(name);
        if (cls < 0) continue;
        metrics::GroundTruthBox box;
        box.chart_id = chart_id;
        box.bbox = svg::element_bbox(doc.elements[size_t(idx)]);
        box.class_id = cls;
        shard.ground_truths.push_back(box);
      }
      for (const neural::Prediction& p : preds) {
        metrics::Detection det;
        det.chart_id = chart_id;
        det.bbox = svg::element_bbox(doc.elements[size_t(p.element)]);
        det.class_id = p.class_id;
        det.confidence = p.confidence;
        shard.detections.push_back(det);
      }
    } catch (const std::exception& ex) {
#pragma omp critical
      if (first_error.empty()) first_error = ex.what();
    }
  }
  if (!first_error.empty()) raise(Errc::IoError, "evaluation failed: " + first_error);

  EvalData out;
  for (EvalData& shard : shards) {
    out.detections.insert(out.detections.end(), shard.detections.begin(), shard.detections.end());
    out.ground_truths.insert(out.ground_truths.end(), shard.ground_truths.begin(),
                             shard.ground_truths.end());
  }
  return out;
}

}  // namespace chartrevive::pipeline
