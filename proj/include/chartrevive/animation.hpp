#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chartrevive/insights.hpp"
#include "chartrevive/narration.hpp"
#include "chartrevive/recovery.hpp"

namespace chartrevive::animation {

enum class Effect {
  FadeIn,
  Wipe,
  ShowBox,
  ShowText,
  ChangeColor,
  Highlight,
  BarBounce,
  ShowArrow,
  ShowCircle,
  FadeOut,
};

enum class Phase { Entrance, Emphasis, Exit };

const char* effect_name(Effect e);
const char* phase_name(Phase p);
Effect effect_from_name(const std::string& n);
Phase phase_from_name(const std::string& n);
Phase phase_of(Effect e);

struct AnimationEntry {
  std::string target_selector;  // comma-separated #id selectors
  Effect effect = Effect::FadeIn;
  Phase phase = Phase::Entrance;
  size_t word_begin = 0, word_end = 0;  // [begin, end) into the script words
  std::optional<std::pair<double, double>> time_ms;
  std::map<std::string, std::string> params;
};

struct AnimationPlan {
  std::vector<AnimationEntry> entries;
  std::vector<std::string> warnings;
};

std::vector<AnimationEntry> plan_context_animations(const narration::NarrationScript& script,
                                                    const recovery::LabeledChart& chart);

std::vector<AnimationEntry> plan_insight_animations(const narration::NarrationScript& script,
                                                    const recovery::LabeledChart& chart,
                                                    const std::vector<insights::Insight>& distilled,
                                                    const recovery::DataTable& table,
                                                    std::vector<std::string>* warnings = nullptr);

void resolve_intervals(AnimationPlan& plan, const narration::NarrationScript& script);

std::string render_animated_svg(const std::string& labeled_svg, const AnimationPlan& plan);

std::string plan_json(const AnimationPlan& plan);
AnimationPlan plan_from_json(const std::string& text);

}  // namespace chartrevive::animation
