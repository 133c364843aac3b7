#include "chartrevive/insights.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "chartrevive/error.hpp"

namespace chartrevive::insights {

using recovery::DataRow;
using recovery::DataTable;

const char* insight_type_name(InsightType t) {
  switch (t) {
    case InsightType::Value: return "value";
    case InsightType::Proportion: return "proportion";
    case InsightType::Difference: return "difference";
    case InsightType::Trend: return "trend";
    case InsightType::Rank: return "rank";
    case InsightType::Aggregation: return "aggregation";
    case InsightType::Extreme: return "extreme";
    case InsightType::Outlier: return "outlier";
    case InsightType::Distribution: return "distribution";
  }
  return "?";
}

const char* sub_type_name(SubType s) {
  switch (s) {
    case SubType::Value: return "value";
    case SubType::Majority: return "majority";
    case SubType::Minority: return "minority";
    case SubType::Difference: return "difference";
    case SubType::Fluctuate: return "fluctuate";
    case SubType::Increase: return "increase";
    case SubType::Decrease: return "decrease";
    case SubType::FluctuateIncrease: return "fluctuate_increase";
    case SubType::FluctuateDecrease: return "fluctuate_decrease";
    case SubType::Rank: return "rank";
    case SubType::Average: return "average";
    case SubType::Sum: return "sum";
    case SubType::Count: return "count";
    case SubType::Maximum: return "maximum";
    case SubType::Minimum: return "minimum";
    case SubType::Outlier: return "outlier";
    case SubType::Normal: return "normal";
    case SubType::Uniform: return "uniform";
    case SubType::NoDistribution: return "none";
  }
  return "?";
}

InsightType insight_type_from_name(const std::string& n) {
  for (int t = 0; t <= int(InsightType::Distribution); ++t)
    if (n == insight_type_name(InsightType(t))) return InsightType(t);
  raise(Errc::UnknownField, "unknown insight type '" + n + "'");
}

SubType sub_type_from_name(const std::string& n) {
  for (int s = 0; s <= int(SubType::NoDistribution); ++s)
    if (n == sub_type_name(SubType(s))) return SubType(s);
  raise(Errc::UnknownField, "unknown sub-insight type '" + n + "'");
}

bool sub_legal_for(InsightType t, SubType s) {
  switch (t) {
    case InsightType::Value: return s == SubType::Value;
    case InsightType::Proportion: return s == SubType::Majority || s == SubType::Minority;
    case InsightType::Difference: return s == SubType::Difference;
    case InsightType::Trend:
      return s == SubType::Fluctuate || s == SubType::Increase || s == SubType::Decrease ||
             s == SubType::FluctuateIncrease || s == SubType::FluctuateDecrease;
    case InsightType::Rank: return s == SubType::Rank;
    case InsightType::Aggregation:
      return s == SubType::Average || s == SubType::Sum || s == SubType::Count;
    case InsightType::Extreme: return s == SubType::Maximum || s == SubType::Minimum;
    case InsightType::Outlier: return s == SubType::Outlier;
    case InsightType::Distribution:
      return s == SubType::Normal || s == SubType::Uniform || s == SubType::NoDistribution;
  }
  return false;
}

bool is_symbolic_x(const std::string& x) {
  static const std::set<std::string> kSymbolic = {"average", "sum",      "count", "gap",
                                                  "spread",  "skewness", "kurtosis"};
  return kSymbolic.count(x) > 0;
}

namespace {

RelDatum datum(const DataRow& row) { return {row.x, row.series, row.y}; }

// Quartiles via linear interpolation on the sorted sample (the common
// "type 7" estimator).
double quantile(std::vector<double> sorted, double q) {
  double pos = q * double(sorted.size() - 1);
  size_t lo = size_t(pos);
  size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - double(lo);
  return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

struct TrendFit {
  double slope = 0, r2 = 1, m_norm = 0;
};

TrendFit fit_trend(const std::vector<double>& v) {
  TrendFit fit;
  size_t n = v.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += double(i);
    sy += v[i];
    sxx += double(i) * double(i);
    sxy += double(i) * v[i];
  }
  double dn = double(n);
  double denom = dn * sxx - sx * sx;
  fit.slope = (dn * sxy - sx * sy) / denom;
  double intercept = (sy - fit.slope * sx) / dn;
  double ss_res = 0, ss_tot = 0;
  double mean = sy / dn;
  for (size_t i = 0; i < n; ++i) {
    double pred = fit.slope * double(i) + intercept;
    ss_res += (v[i] - pred) * (v[i] - pred);
    ss_tot += (v[i] - mean) * (v[i] - mean);
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  double range = *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
  // total fitted change over the value range; 1.0 for an exact monotone line
  fit.m_norm = range > 0 ? fit.slope * double(n - 1) / range : 0.0;
  return fit;
}

SubType classify_trend(const TrendFit& f, const Thresholds& th) {
  bool sloped = std::fabs(f.m_norm) >= th.trend_slope;
  if (sloped && f.r2 >= th.r2_strong) return f.m_norm > 0 ? SubType::Increase : SubType::Decrease;
  if (sloped && f.r2 >= th.r2_weak)
    return f.m_norm > 0 ? SubType::FluctuateIncrease : SubType::FluctuateDecrease;
  return SubType::Fluctuate;
}

}  // namespace

std::vector<Insight> compute_insights(const DataTable& t, const Thresholds& th) {
  if (t.rows.size() < 2) raise(Errc::TooFewRows, "need at least 2 rows");
  const std::vector<DataRow>& rows = t.rows;
  size_t n = rows.size();

  std::vector<double> values;
  values.reserve(n);
  for (const DataRow& r : rows) values.push_back(r.y);

  std::vector<Insight> out;

  // value: first and last data points
  {
    Insight i;
    i.type = InsightType::Value;
    i.sub = SubType::Value;
    i.relevant = {datum(rows.front()), datum(rows.back())};
    i.score = 0.2;
    out.push_back(i);
  }

  // proportion over the pooled values
  double total = 0;
  for (double v : values) total += v;
  if (total > 0) {
    size_t arg_max = 0, arg_min = 0;
    for (size_t i = 1; i < n; ++i) {
      if (values[i] > values[arg_max]) arg_max = i;
      if (values[i] < values[arg_min]) arg_min = i;
    }
    double max_share = values[arg_max] / total;
    if (max_share >= th.majority_share) {
      Insight i;
      i.type = InsightType::Proportion;
      i.sub = SubType::Majority;
      i.relevant = {{rows[arg_max].x, rows[arg_max].series, max_share * 100.0}};
      i.score = max_share;
      out.push_back(i);
    }
    {
      Insight i;
      i.type = InsightType::Proportion;
      i.sub = SubType::Minority;
      i.relevant = {{rows[arg_min].x, rows[arg_min].series, values[arg_min] / total * 100.0}};
      i.score = max_share;
      out.push_back(i);
    }
  }

  // difference: max vs min, and the two largest categories
  {
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] > values[b]; });
    double vmax = values[order.front()], vmin = values[order.back()];
    Insight gap;
    gap.type = InsightType::Difference;
    gap.sub = SubType::Difference;
    gap.relevant = {datum(rows[order.front()]), datum(rows[order.back()]),
                    {"gap", std::nullopt, vmax - vmin}};
    gap.score = vmax != 0 ? (vmax - vmin) / std::fabs(vmax) : 0;
    out.push_back(gap);
    if (n >= 2 && order[1] != order.back()) {
      Insight top2;
      top2.type = InsightType::Difference;
      top2.sub = SubType::Difference;
      top2.relevant = {datum(rows[order[0]]), datum(rows[order[1]]),
                       {"gap", std::nullopt, values[order[0]] - values[order[1]]}};
      top2.score = vmax != 0 ? (values[order[0]] - values[order[1]]) / std::fabs(vmax) : 0;
      out.push_back(top2);
    }
  }

  // trend per series, in first-appearance order
  {
    std::vector<std::optional<std::string>> series_keys;
    for (const DataRow& r : rows) {
      if (std::find(series_keys.begin(), series_keys.end(), r.series) == series_keys.end())
        series_keys.push_back(r.series);
    }
    for (const auto& key : series_keys) {
      std::vector<double> sv;
      std::vector<size_t> sidx;
      for (size_t i = 0; i < n; ++i)
        if (rows[i].series == key) {
          sv.push_back(values[i]);
          sidx.push_back(i);
        }
      if (sv.size() < 2) continue;
      TrendFit fit = fit_trend(sv);
      Insight i;
      i.type = InsightType::Trend;
      i.sub = classify_trend(fit, th);
      i.series = key;
      for (size_t idx : sidx) i.relevant.push_back(datum(rows[idx]));
      i.score = std::fabs(fit.m_norm) * std::max(0.0, fit.r2);
      out.push_back(i);
    }
  }

  // rank: top 3 by value
  {
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] > values[b]; });
    Insight i;
    i.type = InsightType::Rank;
    i.sub = SubType::Rank;
    for (size_t k = 0; k < std::min<size_t>(3, n); ++k) i.relevant.push_back(datum(rows[order[k]]));
    i.score = 0.4;
    out.push_back(i);
  }

  // aggregation: average, sum, count
  {
    double sum = 0;
    for (double v : values) sum += v;
    Insight avg;
    avg.type = InsightType::Aggregation;
    avg.sub = SubType::Average;
    avg.relevant = {{"average", std::nullopt, sum / double(n)}};
    avg.score = 0.3;
    out.push_back(avg);
    Insight s;
    s.type = InsightType::Aggregation;
    s.sub = SubType::Sum;
    s.relevant = {{"sum", std::nullopt, sum}};
    s.score = 0.3;
    out.push_back(s);
    Insight c;
    c.type = InsightType::Aggregation;
    c.sub = SubType::Count;
    c.relevant = {{"count", std::nullopt, double(n)}};
    c.score = 0.3;
    out.push_back(c);
  }

  // extreme: maximum and minimum
  {
    size_t arg_max = 0, arg_min = 0;
    for (size_t i = 1; i < n; ++i) {
      if (values[i] > values[arg_max]) arg_max = i;
      if (values[i] < values[arg_min]) arg_min = i;
    }
    Insight mx;
    mx.type = InsightType::Extreme;
    mx.sub = SubType::Maximum;
    mx.relevant = {datum(rows[arg_max])};
    mx.score = 0.5;
    out.push_back(mx);
    Insight mn;
    mn.type = InsightType::Extreme;
    mn.sub = SubType::Minimum;
    mn.relevant = {datum(rows[arg_min])};
    mn.score = 0.5;
    out.push_back(mn);
  }

  // outlier: Tukey fences over the pooled values
  {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double q1 = quantile(sorted, 0.25);
    double q3 = quantile(sorted, 0.75);
    double iqr = q3 - q1;
    double lo = q1 - th.tukey_k * iqr;
    double hi = q3 + th.tukey_k * iqr;
    double median = quantile(sorted, 0.5);
    Insight i;
    i.type = InsightType::Outlier;
    i.sub = SubType::Outlier;
    double worst = 0;
    for (size_t k = 0; k < n; ++k)
      if (values[k] < lo || values[k] > hi) {
        i.relevant.push_back(datum(rows[k]));
        if (iqr > 0) worst = std::max(worst, std::fabs(values[k] - median) / iqr);
      }
    if (!i.relevant.empty()) {
      i.score = worst;
      out.push_back(i);
    }
  }

  // distribution shape
  {
    double mean = 0;
    for (double v : values) mean += v;
    mean /= double(n);
    double vmin = *std::min_element(values.begin(), values.end());
    double vmax = *std::max_element(values.begin(), values.end());
    Insight i;
    i.type = InsightType::Distribution;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : values) {
      double d = v - mean;
      m2 += d * d;
      m3 += d * d * d;
      m4 += d * d * d * d;
    }
    m2 /= double(n);
    m3 /= double(n);
    m4 /= double(n);
    double skew = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0;
    double kurt = m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0;
    if (mean != 0 && (vmax - vmin) / std::fabs(mean) <= th.uniform_spread) {
      i.sub = SubType::Uniform;
      i.relevant = {{"spread", std::nullopt, (vmax - vmin) / std::fabs(mean)}};
      i.score = 0.6;
    } else if (n >= 4 && std::fabs(skew) <= th.skew_bound &&
               std::fabs(kurt) <= th.kurtosis_bound) {
      i.sub = SubType::Normal;
      i.relevant = {{"skewness", std::nullopt, skew}, {"kurtosis", std::nullopt, kurt}};
      i.score = 0.6;
    } else {
      i.sub = SubType::NoDistribution;
      i.relevant = {{"skewness", std::nullopt, skew}, {"kurtosis", std::nullopt, kurt}};
      i.score = 0;
    }
    for (const DataRow& r : rows) i.relevant.push_back(datum(r));
    out.push_back(i);
  }

  return out;
}

std::vector<Insight> distill(const std::vector<Insight>& all, recovery::ChartKind chart_type,
                             int max_distilled) {
  std::vector<Insight> eligible;
  for (const Insight& i : all) {
    if (i.type == InsightType::Trend && chart_type != recovery::ChartKind::Line) continue;
    eligible.push_back(i);
  }
  std::stable_sort(eligible.begin(), eligible.end(), [](const Insight& a, const Insight& b) {
    if (a.score != b.score) return a.score > b.score;
    return false;  // stable: compute order (enum order) breaks ties
  });
  if (int(eligible.size()) > max_distilled) eligible.resize(size_t(max_distilled));
  return eligible;
}

ValidationResult validate_insight(const Insight& i, const DataTable& t, const Thresholds& th) {
  if (!sub_legal_for(i.type, i.sub))
    raise(Errc::UnknownField, std::string("sub '") + sub_type_name(i.sub) +
                                  "' not legal for insight type '" + insight_type_name(i.type) +
                                  "'");

  // referenced series and x values must exist in the table
  for (const RelDatum& d : i.relevant) {
    if (is_symbolic_x(d.x)) continue;
    bool found = false;
    for (const DataRow& r : t.rows) {
      if (r.x != d.x) continue;
      if (d.series && r.series != d.series) continue;
      found = true;
      break;
    }
    if (!found)
      raise(Errc::UnknownField, "insight references '" + d.x + "' not present in the table");
  }

  std::vector<Insight> recomputed = compute_insights(t, th);
  const Insight* match = nullptr;
  for (const Insight& r : recomputed)
    if (r.type == i.type && r.sub == i.sub && r.series == i.series) {
      match = &r;
      break;
    }
  if (!match) {
    for (const Insight& r : recomputed)
      if (r.type == i.type) {
        match = &r;
        break;
      }
  }
  if (!match) {
    // the claimed fact does not hold at all (e.g. majority with no majority)
    ValidationResult res;
    res.valid = false;
    return res;
  }

  auto close = [](double a, double b) {
    double scale = std::max({std::fabs(a), std::fabs(b), 1e-12});
    return std::fabs(a - b) <= 1e-6 * scale;
  };
  bool same = match->sub == i.sub && match->relevant.size() == i.relevant.size();
  if (same) {
    for (size_t k = 0; k < i.relevant.size(); ++k) {
      const RelDatum& a = i.relevant[k];
      const RelDatum& b = match->relevant[k];
      if (a.x != b.x || a.series != b.series || !close(a.value, b.value)) {
        same = false;
        break;
      }
    }
  }
  ValidationResult res;
  if (same) {
    res.valid = true;
  } else {
    res.valid = false;
    res.corrected = *match;
  }
  return res;
}

// --- json ------------------------------------------------------------------------

namespace {

nlohmann::ordered_json relevant_json(const std::vector<RelDatum>& rel) {
  nlohmann::ordered_json arr = nlohmann::json::array();
  for (const RelDatum& d : rel) {
    nlohmann::ordered_json e;
    e["x"] = d.x;
    if (d.series) e["series"] = *d.series;
    e["value"] = d.value;
    arr.push_back(e);
  }
  return arr;
}

// Groups consecutive insights of one type into the published shape:
// {insightType, subInsights: [...], score}.
nlohmann::ordered_json grouped_json(const std::vector<Insight>& list) {
  nlohmann::ordered_json arr = nlohmann::json::array();
  for (size_t i = 0; i < list.size();) {
    size_t j = i;
    while (j < list.size() && list[j].type == list[i].type) ++j;
    nlohmann::ordered_json group;
    group["insightType"] = insight_type_name(list[i].type);
    group["subInsights"] = nlohmann::json::array();
    double score = 0;
    for (size_t k = i; k < j; ++k) {
      nlohmann::ordered_json sub;
      sub["subType"] = sub_type_name(list[k].sub);
      if (list[k].series) sub["series"] = *list[k].series;
      sub["relevantData"] = relevant_json(list[k].relevant);
      sub["score"] = list[k].score;
      group["subInsights"].push_back(sub);
      score = std::max(score, list[k].score);
    }
    group["score"] = score;
    arr.push_back(group);
    i = j;
  }
  return arr;
}

std::vector<Insight> parse_grouped(const nlohmann::json& arr) {
  std::vector<Insight> out;
  for (const auto& group : arr) {
    InsightType type = insight_type_from_name(group.at("insightType").get<std::string>());
    for (const auto& sub : group.at("subInsights")) {
      Insight i;
      i.type = type;
      i.sub = sub_type_from_name(sub.at("subType").get<std::string>());
      if (!sub_legal_for(i.type, i.sub))
        raise(Errc::UnknownField, "illegal sub type in insight json");
      if (sub.contains("series")) i.series = sub.at("series").get<std::string>();
      i.score = sub.contains("score") ? sub.at("score").get<double>()
                                      : group.value("score", 0.0);
      for (const auto& d : sub.at("relevantData")) {
        RelDatum rd;
        rd.x = d.at("x").get<std::string>();
        if (d.contains("series")) rd.series = d.at("series").get<std::string>();
        rd.value = d.at("value").get<double>();
        i.relevant.push_back(rd);
      }
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace

std::string insights_json(const std::vector<Insight>& all, const std::vector<Insight>& distilled) {
  nlohmann::ordered_json j;
  j["insights"] = grouped_json(all);
  j["distilled"] = grouped_json(distilled);
  return j.dump(2);
}

void insights_from_json(const std::string& text, std::vector<Insight>& all,
                        std::vector<Insight>& distilled) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::IoError, std::string("bad insights json: ") + e.what());
  }
  all = parse_grouped(j.at("insights"));
  distilled = parse_grouped(j.at("distilled"));
}

std::vector<Insight> insight_list_from_json_value(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::IoError, std::string("bad insight json: ") + e.what());
  }
  if (j.is_object()) j = nlohmann::json::array({j});
  return parse_grouped(j);
}

}  // namespace chartrevive::insights
