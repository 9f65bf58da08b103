#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autothink/template_codec.hpp"

namespace autothink {

struct GroundTruth {
  ResponsePayload expected;
};

struct RewardConfig {
  bool length_penalty_enabled = false;
  std::size_t target_length = 0;   // l
  double penalty_magnitude = 0.5;  // lambda
  double invalid_format_reward = -1.0;
};

struct RewardBreakdown {
  int format = 0;
  std::optional<double> answer;
  double length_penalty = 0.0;
  double total = 0.0;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

// Eq.-5 style answer reward values.
inline constexpr double kRewardCorrectNoThink = 1.0;
inline constexpr double kRewardCorrectThink = 0.5;
inline constexpr double kRewardWrongThink = -0.5;
inline constexpr double kRewardWrongNoThink = -1.0;

// Sorts keys at every depth (std::map storage), folds integral floats and -0
// into integers. Strings are left untouched.
Json canonicalize_json(const Json& value);
ToolCall canonicalize_call(const ToolCall& call);

// Deep, type-sensitive equality on canonical forms ("1" != 1, 2.0 == 2).
bool canonical_equal(const Json& a, const Json& b);

// Order-insensitive, multiplicity-sensitive multiset comparison.
bool calls_match(std::span<const ToolCall> a, std::span<const ToolCall> b);

bool payload_matches(const ResponsePayload& got, const ResponsePayload& expected);

double answer_reward(const ParsedResponse& parsed, const GroundTruth& gt);

RewardBreakdown composite_reward(std::string_view raw, const GroundTruth& gt,
                                 const RewardConfig& cfg);

// Throws std::invalid_argument on an empty group.
std::vector<RewardBreakdown> score_group(std::span<const std::string> raws,
                                         const GroundTruth& gt,
                                         const RewardConfig& cfg);

Json to_json(const RewardBreakdown& r);

// {"type":"tool_calls","calls":[...]} or {"type":"text","text":"..."}.
GroundTruth ground_truth_from_json(const Json& expected);
Json to_json(const GroundTruth& gt);

}  // namespace autothink
