#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chartrevive/recovery.hpp"

namespace chartrevive::insights {

enum class InsightType {
  Value,
  Proportion,
  Difference,
  Trend,
  Rank,
  Aggregation,
  Extreme,
  Outlier,
  Distribution,
};

enum class SubType {
  Value,
  Majority,
  Minority,
  Difference,
  Fluctuate,
  Increase,
  Decrease,
  FluctuateIncrease,
  FluctuateDecrease,
  Rank,
  Average,
  Sum,
  Count,
  Maximum,
  Minimum,
  Outlier,
  Normal,
  Uniform,
  NoDistribution,
};

const char* insight_type_name(InsightType t);
const char* sub_type_name(SubType s);
InsightType insight_type_from_name(const std::string& n);
SubType sub_type_from_name(const std::string& n);
bool sub_legal_for(InsightType t, SubType s);

struct RelDatum {
  std::string x;
  std::optional<std::string> series;
  double value = 0;
};

struct Insight {
  InsightType type = InsightType::Value;
  SubType sub = SubType::Value;
  std::vector<RelDatum> relevant;
  double score = 0;
  std::optional<std::string> series;  // for per-series facts
};

// All thresholds feeding the fact rules; repo-defined and configurable.
struct Thresholds {
  double trend_slope = 0.05;
  double r2_strong = 0.9;
  double r2_weak = 0.3;
  double tukey_k = 1.5;
  double uniform_spread = 0.1;
  double skew_bound = 0.5;
  double kurtosis_bound = 1.0;
  double majority_share = 0.5;
};

std::vector<Insight> compute_insights(const recovery::DataTable& t, const Thresholds& th = {});

std::vector<Insight> distill(const std::vector<Insight>& all, recovery::ChartKind chart_type,
                             int max_distilled = 2);

struct ValidationResult {
  bool valid = false;
  std::optional<Insight> corrected;
};

ValidationResult validate_insight(const Insight& i, const recovery::DataTable& t,
                                  const Thresholds& th = {});

// x names that carry computed claims rather than table references.
bool is_symbolic_x(const std::string& x);

std::string insights_json(const std::vector<Insight>& all, const std::vector<Insight>& distilled);
void insights_from_json(const std::string& text, std::vector<Insight>& all,
                        std::vector<Insight>& distilled);
std::vector<Insight> insight_list_from_json_value(const std::string& text);

}  // namespace chartrevive::insights
