#pragma once

// Auto-thinking response grammar:
//
//   [mode]think[/mode][think]R[/think]A
//   [mode]no_think[/mode][no_think]\n[/no_think]A
//
// where A is either a [tool_call]...[/tool_call] block wrapping a JSON array
// of {"name", "arguments"} objects, or free text addressed to the user.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace autothink {

using Json = nlohmann::json;

enum class ReasoningMode { kThink, kNoThink };

std::string_view to_string(ReasoningMode mode);
std::optional<ReasoningMode> reasoning_mode_from_string(std::string_view name);

// Trajectory-level mode flag: Think -> 0 (long), NoThink -> 1 (short).
inline int mode_flag(ReasoningMode mode) {
  return mode == ReasoningMode::kNoThink ? 1 : 0;
}

struct ToolCall {
  std::string name;
  Json arguments = Json::object();

  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct UserText {
  std::string text;

  friend bool operator==(const UserText&, const UserText&) = default;
};

using ToolCalls = std::vector<ToolCall>;
using ResponsePayload = std::variant<ToolCalls, UserText>;

struct ParsedResponse {
  ReasoningMode mode = ReasoningMode::kNoThink;
  std::optional<std::string> reasoning_text;
  ResponsePayload payload = UserText{};
  std::size_t token_length = 0;
};

// Structural equality ignoring token_length; JSON objects compare with
// sorted keys, so key order in the source text never matters.
bool same_structure(const ParsedResponse& a, const ParsedResponse& b);

enum class FormatErrorKind {
  kMissingModeTag,
  kUnknownMode,
  kMissingReasoningBlock,
  kModeBlockMismatch,
  kNonEmptyNoThinkBody,
  kMalformedToolCallJson,
  kTrailingGarbage,
};

std::string_view to_string(FormatErrorKind kind);

struct FormatError {
  FormatErrorKind kind;
  std::size_t position = 0;  // character offset into the raw text
  std::string detail;
};

using ParseResult = std::variant<ParsedResponse, FormatError>;

ParseResult parse_response(std::string_view raw);
std::string render_response(const ParsedResponse& r);
int format_reward(std::string_view raw);
std::string_view extract_mode_prefix(ReasoningMode mode);

// Tool-call array helpers shared with the reward engine and the data files.
// Throws std::invalid_argument on any shape violation.
ToolCalls tool_calls_from_json(const Json& array);
Json tool_calls_to_json(const ToolCalls& calls);
std::string render_tool_calls(const ToolCalls& calls);

std::size_t whitespace_token_count(std::string_view text);

// Checks the ParsedResponse invariants that render_response relies on.
bool is_renderable(const ParsedResponse& r);

}  // namespace autothink
