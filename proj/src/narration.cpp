#include "chartrevive/narration.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "chartrevive/error.hpp"

namespace chartrevive::narration {

using insights::Insight;
using insights::SubType;

std::string fmt_value(double v) {
  if (std::fabs(v - std::round(v)) < 1e-9) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

namespace {

std::vector<std::pair<size_t, size_t>> word_spans(const std::string& text) {
  std::vector<std::pair<size_t, size_t>> spans;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    if (i >= text.size()) break;
    size_t start = i;
    while (i < text.size() && text[i] != ' ') ++i;
    spans.push_back({start, i});
  }
  return spans;
}

// Attaches a phrase annotation for `needle` (must occur in the sentence).
Phrase locate_phrase(const std::string& sentence, const std::string& needle, SubType sub) {
  size_t pos = sentence.find(needle);
  if (pos == std::string::npos)
    raise(Errc::MarkerWordMissing, "phrase '" + needle + "' not found in sentence");
  Phrase p;
  p.char_begin = pos;
  p.char_end = pos + needle.size();
  auto spans = word_spans(sentence);
  p.word_begin = spans.size();
  p.word_end = 0;
  for (size_t w = 0; w < spans.size(); ++w) {
    if (spans[w].second > p.char_begin && spans[w].first < p.char_end) {
      p.word_begin = std::min(p.word_begin, w);
      p.word_end = std::max(p.word_end, w + 1);
    }
  }
  p.sub = sub;
  return p;
}

std::string series_prefix(const Insight& ins) {
  return ins.series && !ins.series->empty() ? ("For " + *ins.series + ", ") : "";
}

}  // namespace

std::vector<std::string> context_narration(const ChartMeta& meta, recovery::ChartKind kind) {
  std::string kind_name = recovery::chart_kind_name(kind);
  std::string s1;
  if (meta.title != "None" && !meta.title.empty())
    s1 = "This " + kind_name + " chart is titled '" + meta.title + "'.";
  else
    s1 = "This " + kind_name + " chart is untitled.";

  std::string s2;
  if (kind == recovery::ChartKind::Pie) {
    std::string what = meta.legend_title != "None" && !meta.legend_title.empty()
                           ? meta.legend_title
                           : "slice";
    if (meta.legend_entries > 0)
      s2 = "The sectors show the share of each " + what + ", as listed in the legend.";
    else
      s2 = "The sectors show the share of each " + what + ".";
  } else {
    std::string x = meta.x_title != "None" && !meta.x_title.empty() ? meta.x_title
                                                                    : "unlabeled categories";
    std::string y =
        meta.y_title != "None" && !meta.y_title.empty() ? meta.y_title : "unlabeled values";
    s2 = "The x-axis displays " + x + " while the y-axis shows " + y;
    if (meta.legend_entries > 0)
      s2 += ", and the legend lists " + std::to_string(meta.legend_entries) + " series.";
    else
      s2 += ".";
  }
  return {s1, s2};
}

std::vector<InsightSentence> insight_narration(const std::vector<Insight>& distilled) {
  if (distilled.empty()) raise(Errc::TooFewRows, "no insights to narrate");
  std::vector<InsightSentence> out;

  for (size_t idx = 0; idx < distilled.size(); ++idx) {
    const Insight& ins = distilled[idx];
    InsightSentence s;
    s.insight_index = idx;
    std::string phrase;

    auto rel = [&](size_t k) -> const insights::RelDatum& { return ins.relevant[k]; };

    switch (ins.sub) {
      case SubType::Maximum:
        phrase = "highest value is " + fmt_value(rel(0).value);
        s.text = "The " + phrase + ", reached at " + rel(0).x + ".";
        break;
      case SubType::Minimum:
        phrase = "lowest value is " + fmt_value(rel(0).value);
        s.text = "The " + phrase + ", found at " + rel(0).x + ".";
        break;
      case SubType::Majority:
        phrase = fmt_value(rel(0).value) + "% of the total";
        s.text = rel(0).x + " accounts for " + phrase + ".";
        break;
      case SubType::Minority:
        phrase = "only " + fmt_value(rel(0).value) + "% of the total";
        s.text = rel(0).x + " contributes " + phrase + ".";
        break;
      case SubType::Increase:
        phrase = "steady increase";
        s.text = series_prefix(ins).empty()
                     ? "Overall, the values show a " + phrase + "."
                     : series_prefix(ins) + "the values show a " + phrase + ".";
        break;
      case SubType::Decrease:
        phrase = "steady decrease";
        s.text = series_prefix(ins).empty()
                     ? "Overall, the values show a " + phrase + "."
                     : series_prefix(ins) + "the values show a " + phrase + ".";
        break;
      case SubType::FluctuateIncrease:
        phrase = "fluctuate while trending upward";
        s.text = series_prefix(ins).empty()
                     ? "Overall, the values " + phrase + "."
                     : series_prefix(ins) + "the values " + phrase + ".";
        break;
      case SubType::FluctuateDecrease:
        phrase = "fluctuate while trending downward";
        s.text = series_prefix(ins).empty()
                     ? "Overall, the values " + phrase + "."
                     : series_prefix(ins) + "the values " + phrase + ".";
        break;
      case SubType::Fluctuate:
        phrase = "fluctuate without a clear direction";
        s.text = series_prefix(ins).empty()
                     ? "Overall, the values " + phrase + "."
                     : series_prefix(ins) + "the values " + phrase + ".";
        break;
      case SubType::Difference:
        phrase = "gap between " + rel(0).x + " and " + rel(1).x;
        s.text = "The " + phrase + " reaches " + fmt_value(rel(2).value) + ".";
        break;
      case SubType::Rank: {
        std::string top;
        for (size_t k = 0; k < ins.relevant.size(); ++k) {
          if (k > 0) top += (k + 1 == ins.relevant.size()) ? ", and " : ", ";
          top += rel(k).x;
        }
        phrase = "top values come from " + top;
        s.text = "The " + phrase + ".";
        break;
      }
      case SubType::Average:
        phrase = "the values sit at " + fmt_value(rel(0).value);
        s.text = "On average, " + phrase + ".";
        break;
      case SubType::Sum:
        phrase = "add up to " + fmt_value(rel(0).value);
        s.text = "Altogether, the values " + phrase + ".";
        break;
      case SubType::Count:
        phrase = fmt_value(rel(0).value) + " data points";
        s.text = "There are " + phrase + " in total.";
        break;
      case SubType::Value:
        phrase = "starts at " + fmt_value(rel(0).value) + " and ends at " +
                 fmt_value(rel(1).value);
        s.text = "The series " + phrase + ".";
        break;
      case SubType::Outlier:
        phrase = "stands out as an outlier at " + fmt_value(rel(0).value);
        s.text = rel(0).x + " " + phrase + ".";
        break;
      case SubType::Normal:
        phrase = "roughly normally distributed";
        s.text = "The values are " + phrase + ".";
        break;
      case SubType::Uniform:
        phrase = "spread almost uniformly";
        s.text = "The values are " + phrase + ".";
        break;
      case SubType::NoDistribution:
        phrase = "no particular distribution";
        s.text = "The values follow " + phrase + ".";
        break;
    }

    if (idx > 0) {
      // connector on the second and later insight sentences
      if (!s.text.empty() && s.text[0] >= 'A' && s.text[0] <= 'Z' &&
          (s.text.rfind("The ", 0) == 0 || s.text.rfind("Overall", 0) == 0 ||
           s.text.rfind("On ", 0) == 0 || s.text.rfind("Altogether", 0) == 0 ||
           s.text.rfind("There ", 0) == 0 || s.text.rfind("For ", 0) == 0))
        s.text[0] = char(std::tolower(s.text[0]));
      s.text = "Notably, " + s.text;
    }
    s.phrases.push_back(locate_phrase(s.text, phrase, ins.sub));
    out.push_back(s);
  }
  return out;
}

NarrationScript assemble(const std::vector<std::string>& context,
                         std::vector<InsightSentence> insight, const TimingModel& model) {
  if (context.empty() || insight.empty())
    raise(Errc::TooFewRows, "both narration parts must be non-empty");

  // transition word opens the insight part
  {
    InsightSentence& first = insight.front();
    std::string& t = first.text;
    if (!t.empty() && t[0] >= 'A' && t[0] <= 'Z' &&
        (t.rfind("The ", 0) == 0 || t.rfind("Overall", 0) == 0 || t.rfind("On ", 0) == 0 ||
         t.rfind("Altogether", 0) == 0 || t.rfind("There ", 0) == 0 || t.rfind("For ", 0) == 0))
      t[0] = char(std::tolower(t[0]));
    const std::string prefix = "Now, ";
    t = prefix + t;
    for (Phrase& p : first.phrases) {
      p.char_begin += prefix.size();
      p.char_end += prefix.size();
      p.word_begin += 1;
      p.word_end += 1;
    }
  }

  NarrationScript script;
  script.context_sentences = context;
  script.insight_sentences = std::move(insight);

  auto add_sentence = [&](const std::string& text, Part part) {
    script.sentence_word_offsets.push_back(script.words.size());
    size_t sentence_index = script.sentence_word_offsets.size() - 1;
    for (auto [b, e] : word_spans(text))
      script.words.push_back({text.substr(b, e - b), sentence_index, part});
  };

  for (const std::string& s : context) add_sentence(s, Part::Context);
  script.context_word_count = script.words.size();
  for (const InsightSentence& s : script.insight_sentences) add_sentence(s.text, Part::Insight);

  // synthetic timing: duration = base + per_char * length, pauses between
  // sentences
  script.timings.resize(script.words.size());
  double clock = 0;
  for (size_t w = 0; w < script.words.size(); ++w) {
    if (w > 0 && script.words[w].sentence != script.words[w - 1].sentence)
      clock += model.sentence_pause_ms;
    double dur = model.base_ms_per_word + model.per_char_ms * double(script.words[w].text.size());
    script.timings[w] = {clock, clock + dur};
    clock += dur;
  }
  script.total_ms = clock;
  return script;
}

NarrationScript ingest_timings(const NarrationScript& script, const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::IoError, std::string("bad timing json: ") + e.what());
  }
  const auto& words = j.at("words");
  if (words.size() != script.words.size())
    raise(Errc::WordCountMismatch, "timing file has " + std::to_string(words.size()) +
                                       " words, script has " +
                                       std::to_string(script.words.size()));
  NarrationScript out = script;
  double prev_end = 0;
  for (size_t w = 0; w < out.words.size(); ++w) {
    double start = words[w].at("startMs").get<double>();
    double end = words[w].at("endMs").get<double>();
    if (start < 0 || end < start || start < prev_end)
      raise(Errc::NonMonotoneTimings, "cue " + std::to_string(w) + " overlaps or goes backwards");
    out.timings[w] = {start, end};
    prev_end = end;
  }
  out.total_ms = prev_end;
  return out;
}

namespace {

std::string vtt_timestamp(double ms) {
  if (ms < 0) ms = 0;
  int64_t total = int64_t(std::llround(ms));
  int64_t h = total / 3600000;
  int64_t m = (total / 60000) % 60;
  int64_t s = (total / 1000) % 60;
  int64_t frac = total % 1000;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld.%03lld", (long long)h, (long long)m,
                (long long)s, (long long)frac);
  return buf;
}

}  // namespace

std::string export_vtt(const NarrationScript& script) {
  if (script.words.empty()) return "WEBVTT\n";
  if (script.timings.size() != script.words.size())
    raise(Errc::MissingTimings, "script has no word timings");

  std::string out = "WEBVTT\n\n";
  size_t sentence_count = script.sentence_word_offsets.size();
  for (size_t s = 0; s < sentence_count; ++s) {
    size_t begin = script.sentence_word_offsets[s];
    size_t end = (s + 1 < sentence_count) ? script.sentence_word_offsets[s + 1]
                                          : script.words.size();
    if (begin == end) continue;
    out += vtt_timestamp(script.timings[begin].start_ms) + " --> " +
           vtt_timestamp(script.timings[end - 1].end_ms) + "\n";
    std::string text;
    for (size_t w = begin; w < end; ++w) {
      if (w > begin) text += ' ';
      text += script.words[w].text;
    }
    out += text + "\n\n";
  }
  return out;
}

// --- serialization -------------------------------------------------------------

std::string script_json(const NarrationScript& script) {
  nlohmann::ordered_json j;
  j["templateVersion"] = kTemplateVersion;
  j["contextSentences"] = script.context_sentences;
  j["insightSentences"] = nlohmann::json::array();
  for (const InsightSentence& s : script.insight_sentences) {
    nlohmann::ordered_json e;
    e["text"] = s.text;
    e["insight"] = s.insight_index;
    e["phrases"] = nlohmann::json::array();
    for (const Phrase& p : s.phrases)
      e["phrases"].push_back({{"charRange", {p.char_begin, p.char_end}},
                              {"wordRange", {p.word_begin, p.word_end}},
                              {"subType", insights::sub_type_name(p.sub)}});
    j["insightSentences"].push_back(e);
  }
  j["words"] = nlohmann::json::array();
  for (size_t w = 0; w < script.words.size(); ++w) {
    nlohmann::ordered_json e;
    e["text"] = script.words[w].text;
    e["sentence"] = script.words[w].sentence;
    e["part"] = script.words[w].part == Part::Context ? "context" : "insight";
    if (w < script.timings.size()) {
      e["startMs"] = script.timings[w].start_ms;
      e["endMs"] = script.timings[w].end_ms;
    }
    j["words"].push_back(e);
  }
  j["sentenceWordOffsets"] = script.sentence_word_offsets;
  j["contextWordCount"] = script.context_word_count;
  j["totalMs"] = script.total_ms;
  return j.dump(2);
}

NarrationScript script_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::IoError, std::string("bad narration json: ") + e.what());
  }
  NarrationScript s;
  s.context_sentences = j.at("contextSentences").get<std::vector<std::string>>();
  for (const auto& e : j.at("insightSentences")) {
    InsightSentence is;
    is.text = e.at("text").get<std::string>();
    is.insight_index = e.at("insight").get<size_t>();
    for (const auto& p : e.at("phrases")) {
      Phrase ph;
      ph.char_begin = p.at("charRange")[0].get<size_t>();
      ph.char_end = p.at("charRange")[1].get<size_t>();
      ph.word_begin = p.at("wordRange")[0].get<size_t>();
      ph.word_end = p.at("wordRange")[1].get<size_t>();
      ph.sub = insights::sub_type_from_name(p.at("subType").get<std::string>());
      is.phrases.push_back(ph);
    }
    s.insight_sentences.push_back(is);
  }
  for (const auto& e : j.at("words")) {
    Word w;
    w.text = e.at("text").get<std::string>();
    w.sentence = e.at("sentence").get<size_t>();
    w.part = e.at("part").get<std::string>() == "context" ? Part::Context : Part::Insight;
    s.words.push_back(w);
    if (e.contains("startMs"))
      s.timings.push_back({e.at("startMs").get<double>(), e.at("endMs").get<double>()});
  }
  s.sentence_word_offsets = j.at("sentenceWordOffsets").get<std::vector<size_t>>();
  s.context_word_count = j.at("contextWordCount").get<size_t>();
  s.total_ms = j.at("totalMs").get<double>();
  return s;
}

}  // namespace chartrevive::narration
