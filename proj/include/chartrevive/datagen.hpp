#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chartrevive/recovery.hpp"

namespace chartrevive::datagen {

enum class Pattern { None, MonotoneUp, MonotoneDown, Outlier, DominantSlice };
const char* pattern_name(Pattern p);

enum class LegendPos { Right, Top, None };
enum class LabelFormat { Plain, Thousands, Kilo, Percent };

struct ChartStyle {
  int palette = 0;  // index into the 5 built-in palettes
  LegendPos legend_pos = LegendPos::Right;
  bool grid = true;
  double donut_ratio = 0;  // 0 for a plain pie, up to 0.7
  bool bar_labels = false;
  bool axis_titles = true;
  double font_size = 12;
  double width = 600;
  double height = 400;
  LabelFormat label_format = LabelFormat::Plain;
};

struct SeriesData {
  std::string name;
  std::vector<double> values;
};

struct ChartSpec {
  recovery::ChartKind type = recovery::ChartKind::Bar;
  uint64_t seed = 0;
  ChartStyle style;
  std::vector<std::string> categories;
  std::vector<SeriesData> series;
  Pattern pattern = Pattern::None;
  std::string title, x_title, y_title, legend_title;  // empty when absent
};

struct GroundTruth {
  std::map<int, std::string> labels;  // element index -> sub-category
  recovery::DataTable table;
  struct Meta {
    std::string chart_type;
    std::string title, x_title, y_title, legend_title;  // "None" when absent
    std::vector<std::string> legend_entries;
    std::string pattern;
  } meta;
};

// Styled spec with data, derived deterministically from (type, seed).
ChartSpec make_chart_spec(recovery::ChartKind type, uint64_t seed);

// Renders the spec; same spec yields byte-identical SVG. Ground-truth labels
// index elements in document order, matching parse_svg.
std::pair<std::string, GroundTruth> generate_chart(const ChartSpec& spec);

struct ManifestEntry {
  std::string path;
  std::string type;
  uint64_t seed = 0;
  std::string split;  // train | val | test
};

struct Manifest {
  std::vector<ManifestEntry> charts;
};

Manifest generate_dataset(int count_per_type, uint64_t seed, const std::string& out_dir);

std::string manifest_json(const Manifest& m);
Manifest manifest_from_json(const std::string& text);
std::string ground_truth_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const std::string& text);

// Deterministic short number formatting shared by the SVG writers.
std::string fmt_num(double v);

}  // namespace chartrevive::datagen
