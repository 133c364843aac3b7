#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chartrevive/insights.hpp"
#include "chartrevive/recovery.hpp"

namespace chartrevive::narration {

inline constexpr int kTemplateVersion = 1;

struct ChartMeta {
  std::string title = "None";
  std::string x_title = "None";
  std::string y_title = "None";
  std::string legend_title = "None";
  size_t legend_entries = 0;
};

// A rendered span within an insight sentence, tied to its sub-insight.
struct Phrase {
  size_t char_begin = 0, char_end = 0;  // within the sentence
  size_t word_begin = 0, word_end = 0;  // word indices within the sentence
  insights::SubType sub = insights::SubType::Value;
};

struct InsightSentence {
  std::string text;
  size_t insight_index = 0;  // into the distilled list
  std::vector<Phrase> phrases;
};

enum class Part { Context, Insight };

struct Word {
  std::string text;
  size_t sentence = 0;  // overall sentence index
  Part part = Part::Context;
};

struct WordTiming {
  double start_ms = 0;
  double end_ms = 0;
};

struct TimingModel {
  double base_ms_per_word = 250;
  double per_char_ms = 25;
  double sentence_pause_ms = 300;
};

struct NarrationScript {
  std::vector<std::string> context_sentences;
  std::vector<InsightSentence> insight_sentences;  // texts after assembly
  std::vector<Word> words;
  std::vector<WordTiming> timings;
  std::vector<size_t> sentence_word_offsets;  // first word index per sentence
  size_t context_word_count = 0;              // index of the first insight word
  double total_ms = 0;
};

// Exactly two sentences: chart type + title, then encodings. Axis sentences
// carry the literal "x-axis"/"y-axis"/"legend" marker words the animation
// planner splits on.
std::vector<std::string> context_narration(const ChartMeta& meta, recovery::ChartKind kind);

std::vector<InsightSentence> insight_narration(const std::vector<insights::Insight>& distilled);

NarrationScript assemble(const std::vector<std::string>& context,
                         std::vector<InsightSentence> insight, const TimingModel& model);

NarrationScript ingest_timings(const NarrationScript& script, const std::string& json_text);

std::string export_vtt(const NarrationScript& script);

std::string script_json(const NarrationScript& script);
NarrationScript script_from_json(const std::string& text);

// Rendering of numbers inside sentences (shared with annotation text).
std::string fmt_value(double v);

}  // namespace chartrevive::narration
