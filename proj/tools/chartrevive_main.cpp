#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "chartrevive/pipeline.hpp"

using namespace chartrevive;

namespace {

int log_level() {
  static int level = [] {
    const char* env = std::getenv("CHARTREVIVE_LOG");
    if (!env) return 1;
    std::string v(env);
    if (v == "error") return 0;
    if (v == "warn") return 1;
    if (v == "info") return 2;
    if (v == "debug") return 3;
    return 1;
  }();
  return level;
}

void log_warn(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[warn] " << msg << "\n";
}
void log_info(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[info] " << msg << "\n";
}

struct GlobalOpts {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  std::string out;
};

pipeline::PipelineConfig load_config(const GlobalOpts& g) {
  pipeline::PipelineConfig cfg;
  if (!g.config_path.empty())
    cfg = pipeline::config_from_json(pipeline::read_file(g.config_path));
  if (g.seed_set) cfg.seed = g.seed;
  if (!g.out.empty()) cfg.out_dir = g.out;
  return cfg;
}

void apply_jobs(int jobs) {
#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#else
  (void)jobs;
#endif
}

recovery::Taxonomy load_taxonomy(const pipeline::PipelineConfig& cfg) {
  if (cfg.taxonomy_path.empty()) return recovery::Taxonomy::default_taxonomy();
  return recovery::Taxonomy::from_json(pipeline::read_file(cfg.taxonomy_path));
}

void print_eval_table(const std::vector<std::pair<std::string, metrics::MapReport>>& rows) {
  std::printf("%-16s %8s %8s %8s\n", "Encoder", "AP50(%)", "AP75(%)", "mAP(%)");
  for (const auto& [name, r] : rows)
    std::printf("%-16s %8.2f %8.2f %8.2f\n", name.c_str(), r.ap50 * 100, r.ap75 * 100,
                r.map * 100);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chartrevive: deconstruct static SVG charts and revive them as Live Charts"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON config file; flags override its values");
  app.add_option("--seed", g.seed, "deterministic seed")->each([&](const std::string&) {
    g.seed_set = true;
  });
  app.add_option("--jobs", g.jobs, "worker threads (0 = library default)");
  app.add_option("--out", g.out, "output directory or file");

  // gen-dataset
  auto* gen = app.add_subcommand("gen-dataset", "generate a synthetic labeled chart dataset");
  int gen_count = 300;
  gen->add_option("--count", gen_count, "charts per type");

  // train
  auto* train = app.add_subcommand("train", "train the element classifier");
  std::string train_manifest, train_encoder = "both", train_weights = "weights.bin";
  std::string train_split = "train";
  neural::TrainConfig tc;
  train->add_option("--manifest", train_manifest, "dataset manifest.json")->required();
  train->add_option("--encoder", train_encoder, "both | stroke | element");
  train->add_option("--weights", train_weights, "output weights file");
  train->add_option("--split", train_split, "manifest split to train on");
  train->add_option("--epochs", tc.epochs, "training epochs");
  train->add_option("--batch", tc.batch_charts, "charts per batch");
  train->add_option("--lr", tc.learning_rate, "learning rate");
  std::string loss_log_path;
  train->add_option("--loss-log", loss_log_path, "write per-epoch loss JSON here");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate weights with AP50/AP75/mAP");
  std::string eval_manifest, eval_split = "test", eval_report;
  std::vector<std::string> eval_weights;
  eval->add_option("--manifest", eval_manifest, "dataset manifest.json")->required();
  eval->add_option("--weights", eval_weights, "weights file(s), one row per file")->required();
  eval->add_option("--split", eval_split, "manifest split to evaluate");
  eval->add_option("--report", eval_report, "write report JSON here");

  // deconstruct
  auto* dec = app.add_subcommand("deconstruct", "classify elements and emit a labeled SVG");
  std::string dec_input, dec_weights, dec_labels, dec_output = "labeled.svg", dec_graph;
  dec->add_option("input", dec_input, "input SVG")->required();
  dec->add_option("--weights", dec_weights, "trained weights (omit when using --labels)");
  dec->add_option("--labels", dec_labels, "ground-truth sidecar JSON instead of the classifier");
  dec->add_option("--output", dec_output, "labeled SVG path");
  dec->add_option("--dump-graph", dec_graph, "write the chart graph debug JSON here");

  // insight
  auto* ins = app.add_subcommand("insight", "compute insights from a labeled SVG");
  std::string ins_input, ins_output = "insights.json", ins_validate;
  ins->add_option("input", ins_input, "labeled SVG")->required();
  ins->add_option("--output", ins_output, "insights JSON path");
  ins->add_option("--validate", ins_validate, "insight JSON to validate against the table");

  // narrate
  auto* nar = app.add_subcommand("narrate", "build the two-part narration with word timings");
  std::string nar_labeled, nar_insights, nar_output = "narration.json", nar_vtt, nar_timings;
  nar->add_option("labeled", nar_labeled, "labeled SVG")->required();
  nar->add_option("insights", nar_insights, "insights JSON")->required();
  nar->add_option("--output", nar_output, "narration JSON path");
  nar->add_option("--vtt", nar_vtt, "also export WebVTT captions here");
  nar->add_option("--timings", nar_timings, "ingest external word timings JSON");

  // animate
  auto* ani = app.add_subcommand("animate", "plan animations and render the live SVG");
  std::string ani_labeled, ani_narration, ani_insights;
  std::string ani_plan = "plan.json", ani_svg = "live.svg";
  ani->add_option("labeled", ani_labeled, "labeled SVG")->required();
  ani->add_option("narration", ani_narration, "narration JSON")->required();
  ani->add_option("insights", ani_insights, "insights JSON")->required();
  ani->add_option("--plan", ani_plan, "plan JSON path");
  ani->add_option("--svg", ani_svg, "animated SVG path");

  // revive
  auto* rev = app.add_subcommand("revive", "full pipeline: static SVG to Live Chart bundle");
  std::string rev_input, rev_weights;
  rev->add_option("input", rev_input, "input SVG")->required();
  rev->add_option("--weights", rev_weights, "trained weights file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  apply_jobs(g.jobs);

  try {
    pipeline::PipelineConfig cfg = load_config(g);

    if (gen->parsed()) {
      std::string out_dir = cfg.out_dir == "." ? "dataset" : cfg.out_dir;
      datagen::Manifest m = datagen::generate_dataset(gen_count, cfg.seed, out_dir);
      log_info("wrote " + std::to_string(m.charts.size()) + " charts to " + out_dir);
      std::printf("%zu charts -> %s\n", m.charts.size(), out_dir.c_str());
      return 0;
    }

    if (train->parsed()) {
      recovery::Taxonomy tax = load_taxonomy(cfg);
      datagen::Manifest manifest =
          datagen::manifest_from_json(pipeline::read_file(train_manifest));
      std::string dir = std::filesystem::path(train_manifest).parent_path().string();
      if (dir.empty()) dir = ".";
      std::vector<neural::TrainSample> samples =
          pipeline::load_split(dir, manifest, train_split, tax);
      log_info("training on " + std::to_string(samples.size()) + " charts");
      tc.seed = cfg.seed;
      neural::TrainResult result = neural::train(
          samples, tax.sub_names(), neural::encoder_config_from_name(train_encoder), tc);
      neural::save_weights(result.weights, train_weights);
      if (!loss_log_path.empty()) {
        nlohmann::ordered_json j;
        j["epochLoss"] = result.epoch_loss;
        pipeline::write_file(loss_log_path, j.dump(2));
      }
      std::printf("trained %s encoder, %d epochs, final loss %.6f -> %s\n",
                  train_encoder.c_str(), tc.epochs, result.epoch_loss.back(),
                  train_weights.c_str());
      return 0;
    }

    if (eval->parsed()) {
      recovery::Taxonomy tax = load_taxonomy(cfg);
      datagen::Manifest manifest = datagen::manifest_from_json(pipeline::read_file(eval_manifest));
      std::string dir = std::filesystem::path(eval_manifest).parent_path().string();
      if (dir.empty()) dir = ".";
      std::vector<std::pair<std::string, metrics::MapReport>> rows;
      std::string last_report;
      for (const std::string& wpath : eval_weights) {
        neural::ModelWeights w = neural::load_weights(wpath);
        pipeline::EvalData data = pipeline::evaluate_split(dir, manifest, eval_split, w, tax);
        metrics::EvalReport report =
            metrics::evaluate(data.detections, data.ground_truths, tax.sub_names());
        rows.push_back({neural::encoder_config_name(w.config), report.overall});
        last_report = metrics::report_json(report);
      }
      print_eval_table(rows);
      std::printf("%s\n", last_report.c_str());
      if (!eval_report.empty()) pipeline::write_file(eval_report, last_report);
      return 0;
    }

    if (dec->parsed()) {
      recovery::Taxonomy tax = load_taxonomy(cfg);
      std::string svg_text = pipeline::read_file(dec_input);
      svg::SvgDocument doc = svg::parse_svg(svg_text);
      std::map<int, std::string> labels;
      if (!dec_labels.empty()) {
        datagen::GroundTruth gt =
            datagen::ground_truth_from_json(pipeline::read_file(dec_labels));
        labels = gt.labels;
      } else {
        std::string wpath = !dec_weights.empty() ? dec_weights : cfg.weights_path;
        if (wpath.empty()) raise(Errc::BadFlag, "deconstruct needs --weights or --labels");
        neural::ModelWeights w = neural::load_weights(wpath);
        graph::ChartGraph gr = graph::build_graph(doc);
        for (const neural::Prediction& p : neural::predict(gr, w))
          labels[p.element] = w.taxonomy[size_t(p.class_id)];
      }
      if (!dec_graph.empty())
        pipeline::write_file(dec_graph, graph::graph_debug_json(graph::build_graph(doc)));
      recovery::LabeledChart chart = recovery::label_chart(doc, labels);
      recovery::DataTable table = recovery::recover_data(chart);
      pipeline::write_file(dec_output, recovery::emit_labeled_svg(chart, table, tax));
      std::printf("labeled %zu elements -> %s\n", labels.size(), dec_output.c_str());
      return 0;
    }

    if (ins->parsed()) {
      std::string svg_text = pipeline::read_file(ins_input);
      svg::SvgDocument doc = svg::parse_svg(svg_text);
      recovery::DataTable table = recovery::parse_ac_data(svg_text);
      recovery::LabeledChart chart =
          recovery::label_chart(doc, pipeline::labels_from_classes(doc));
      recovery::ChartKind kind = recovery::detect_chart_kind(chart);
      if (!ins_validate.empty()) {
        std::vector<insights::Insight> claims =
            insights::insight_list_from_json_value(pipeline::read_file(ins_validate));
        int corrected = 0;
        for (const insights::Insight& claim : claims) {
          insights::ValidationResult r =
              insights::validate_insight(claim, table, cfg.thresholds);
          if (!r.valid) ++corrected;
        }
        std::printf("validated %zu insights, %d corrected\n", claims.size(), corrected);
        return 0;
      }
      std::vector<insights::Insight> all = insights::compute_insights(table, cfg.thresholds);
      std::vector<insights::Insight> distilled = insights::distill(all, kind, cfg.max_distilled);
      pipeline::write_file(ins_output, insights::insights_json(all, distilled));
      std::printf("%zu insights, %zu distilled -> %s\n", all.size(), distilled.size(),
                  ins_output.c_str());
      return 0;
    }

    if (nar->parsed()) {
      std::string svg_text = pipeline::read_file(nar_labeled);
      svg::SvgDocument doc = svg::parse_svg(svg_text);
      recovery::LabeledChart chart =
          recovery::label_chart(doc, pipeline::labels_from_classes(doc));
      recovery::DataTable table = recovery::parse_ac_data(svg_text);
      recovery::ChartKind kind = recovery::detect_chart_kind(chart);
      std::vector<insights::Insight> all, distilled;
      insights::insights_from_json(pipeline::read_file(nar_insights), all, distilled);
      narration::ChartMeta meta = pipeline::meta_from_chart(chart, table);
      narration::NarrationScript script = narration::assemble(
          narration::context_narration(meta, kind), narration::insight_narration(distilled),
          cfg.timing);
      std::string timings = !nar_timings.empty() ? nar_timings : cfg.timings_path;
      if (!timings.empty())
        script = narration::ingest_timings(script, pipeline::read_file(timings));
      pipeline::write_file(nar_output, narration::script_json(script));
      if (!nar_vtt.empty()) pipeline::write_file(nar_vtt, narration::export_vtt(script));
      std::printf("%zu words, %.0f ms -> %s\n", script.words.size(), script.total_ms,
                  nar_output.c_str());
      return 0;
    }

    if (ani->parsed()) {
      std::string svg_text = pipeline::read_file(ani_labeled);
      svg::SvgDocument doc = svg::parse_svg(svg_text);
      recovery::LabeledChart chart =
          recovery::label_chart(doc, pipeline::labels_from_classes(doc));
      recovery::DataTable table = recovery::parse_ac_data(svg_text);
      narration::NarrationScript script =
          narration::script_from_json(pipeline::read_file(ani_narration));
      std::vector<insights::Insight> all, distilled;
      insights::insights_from_json(pipeline::read_file(ani_insights), all, distilled);

      animation::AnimationPlan plan;
      plan.entries = animation::plan_context_animations(script, chart);
      auto insight_entries =
          animation::plan_insight_animations(script, chart, distilled, table, &plan.warnings);
      plan.entries.insert(plan.entries.end(), insight_entries.begin(), insight_entries.end());
      animation::resolve_intervals(plan, script);
      for (const std::string& w : plan.warnings) log_warn(w);
      pipeline::write_file(ani_plan, animation::plan_json(plan));
      pipeline::write_file(ani_svg, animation::render_animated_svg(svg_text, plan));
      std::printf("%zu animation entries -> %s\n", plan.entries.size(), ani_svg.c_str());
      return 0;
    }

    if (rev->parsed()) {
      std::string wpath = !rev_weights.empty() ? rev_weights : cfg.weights_path;
      if (wpath.empty()) raise(Errc::BadFlag, "revive needs --weights or a config with one");
      neural::ModelWeights weights = neural::load_weights(wpath);
      std::string report;
      try {
        pipeline::ReviveBundle bundle =
            pipeline::revive(pipeline::read_file(rev_input), cfg, weights, &report);
        pipeline::write_bundle(bundle, cfg.out_dir);
        std::printf("bundle -> %s\n", cfg.out_dir.c_str());
        return 0;
      } catch (const Error&) {
        // report names the failing stage; keep it on disk
        std::error_code ec;
        std::filesystem::create_directories(cfg.out_dir, ec);
        pipeline::write_file(cfg.out_dir + "/report.json", report);
        throw;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
