#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chartrevive/svg.hpp"

namespace chartrevive::recovery {

// Two-level element category scheme: five primaries, configurable subs.
struct Taxonomy {
  std::vector<std::string> primaries;
  struct Sub {
    std::string name;
    std::string primary;
  };
  std::vector<Sub> subs;

  static Taxonomy default_taxonomy();
  static Taxonomy from_json(const std::string& text);
  std::string to_json() const;

  int index_of(const std::string& sub_name) const;
  const std::string& primary_of(const std::string& sub_name) const;
  std::vector<std::string> sub_names() const;
};

struct LabeledChart {
  svg::SvgDocument doc;
  std::map<int, std::string> labels;  // element index -> sub-category
  std::map<int, std::string> series;  // mark element -> legend entry
  std::map<int, std::string> ids;     // element index -> "<sub>-<n>"
};

struct DataRow {
  std::string x;
  double y = 0;
  std::optional<std::string> series;

  bool operator==(const DataRow&) const = default;
};

struct DataTable {
  std::string x_name = "None";
  std::string y_name = "None";
  std::string legend_name = "None";
  bool has_legend = false;  // three data dimensions when true
  std::vector<DataRow> rows;
};

enum class ChartKind { Bar, Line, Pie };
const char* chart_kind_name(ChartKind k);

// Builds the labeled view: assigns "<sub>-<n>" ids in document order per
// sub-category and resolves mark series via legend matching.
LabeledChart label_chart(const svg::SvgDocument& doc, const std::map<int, std::string>& labels);

// Legend-symbol/legend-label pairing by top-left bbox distance, then
// mark-to-entry assignment by paint equality (1/255 per channel).
std::map<int, std::string> match_legend(const LabeledChart& chart);

ChartKind detect_chart_kind(const LabeledChart& chart);

DataTable recover_data(const LabeledChart& chart);

// Anchor geometry per recovered row: bar top-edge centers, line vertices,
// point centers, sector mid-arc points. Used for data-driven annotations.
struct MarkAnchor {
  int element = 0;
  size_t row = 0;  // index into the recovered table
  svg::Point pos;
};
std::vector<MarkAnchor> mark_anchors(const LabeledChart& chart);

std::string emit_labeled_svg(const LabeledChart& chart, const DataTable& table,
                             const Taxonomy& tax);

DataTable parse_ac_data(const std::string& svg_text);

// Accepts plain numbers plus thousands separators, %, and k/M suffixes.
double parse_numeric_label(const std::string& text);

}  // namespace chartrevive::recovery
