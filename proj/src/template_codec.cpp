#include "autothink/template_codec.hpp"

#include <array>
#include <set>
#include <stdexcept>
#include <utility>

namespace autothink {
namespace {

constexpr std::string_view kModeOpen = "[mode]";
constexpr std::string_view kModeClose = "[/mode]";
constexpr std::string_view kThinkOpen = "[think]";
constexpr std::string_view kThinkClose = "[/think]";
constexpr std::string_view kNoThinkOpen = "[no_think]";
constexpr std::string_view kNoThinkClose = "[/no_think]";
constexpr std::string_view kToolCallOpen = "[tool_call]";
constexpr std::string_view kToolCallClose = "[/tool_call]";

constexpr std::array<std::string_view, 8> kReservedTags = {
    kModeOpen,    kModeClose,    kThinkOpen,    kThinkClose,
    kNoThinkOpen, kNoThinkClose, kToolCallOpen, kToolCallClose,
};

constexpr std::string_view kThinkPrefix = "[mode]think[/mode][think]";
constexpr std::string_view kNoThinkPrefix =
    "[mode]no_think[/mode][no_think]\n[/no_think]";

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_blank(std::string_view s) {
  for (char c : s) {
    if (!is_space(c)) return false;
  }
  return true;
}

bool has_space(std::string_view s) {
  for (char c : s) {
    if (is_space(c)) return true;
  }
  return false;
}

// Position of the first reserved tag inside `s`, or npos.
std::size_t find_reserved_tag(std::string_view s) {
  std::size_t first = std::string_view::npos;
  for (auto tag : kReservedTags) {
    first = std::min(first, s.find(tag));
  }
  return first;
}

// Parses JSON rejecting duplicate object keys at any depth.
Json parse_json_strict(std::string_view text) {
  std::vector<std::set<std::string>> key_stack;
  bool duplicate = false;
  auto cb = [&](int, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start:
        key_stack.emplace_back();
        break;
      case Json::parse_event_t::object_end:
        if (!key_stack.empty()) key_stack.pop_back();
        break;
      case Json::parse_event_t::key:
        if (!key_stack.empty() &&
            !key_stack.back().insert(parsed.get<std::string>()).second) {
          duplicate = true;
        }
        break;
      default:
        break;
    }
    return true;
  };
  Json value = Json::parse(text.begin(), text.end(), cb);
  if (duplicate) throw std::invalid_argument("duplicate object key");
  return value;
}

class Parser {
 public:
  explicit Parser(std::string_view raw) : raw_(raw) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && is_space(raw[b])) ++b;
    while (e > b && is_space(raw[e - 1])) --e;
    pos_ = b;
    end_ = e;
  }

  ParseResult run() {
    ParsedResponse out;
    out.token_length = whitespace_token_count(raw_);

    if (!consume(kModeOpen)) return fail(FormatErrorKind::kMissingModeTag);
    const std::size_t mode_close = find(kModeClose);
    if (mode_close == std::string_view::npos) {
      return fail(FormatErrorKind::kMissingModeTag, "unterminated [mode]");
    }
    auto mode = reasoning_mode_from_string(raw_.substr(pos_, mode_close - pos_));
    if (!mode) return fail(FormatErrorKind::kUnknownMode);
    out.mode = *mode;
    pos_ = mode_close + kModeClose.size();
    skip_space();

    if (out.mode == ReasoningMode::kThink) {
      if (auto err = parse_think_block(out)) return *err;
    } else {
      if (auto err = parse_no_think_block()) return *err;
    }
    skip_space();

    if (consume(kToolCallOpen)) {
      const std::size_t body_begin = pos_;
      const std::size_t close = find(kToolCallClose);
      if (close == std::string_view::npos) {
        return fail(FormatErrorKind::kMalformedToolCallJson,
                    "unterminated [tool_call]");
      }
      try {
        Json body = parse_json_strict(raw_.substr(body_begin, close - body_begin));
        out.payload = tool_calls_from_json(body);
      } catch (const std::exception& e) {
        return fail(FormatErrorKind::kMalformedToolCallJson, e.what());
      }
      pos_ = close + kToolCallClose.size();
      skip_space();
      if (pos_ != end_) return fail(FormatErrorKind::kTrailingGarbage);
    } else {
      std::string_view text = raw_.substr(pos_, end_ - pos_);
      if (auto tag = find_reserved_tag(text); tag != std::string_view::npos) {
        pos_ += tag;
        return fail(FormatErrorKind::kTrailingGarbage, "reserved tag in answer");
      }
      out.payload = UserText{std::string(text)};
    }
    return out;
  }

 private:
  std::optional<FormatError> parse_think_block(ParsedResponse& out) {
    if (!consume(kThinkOpen)) {
      if (at(kNoThinkOpen)) return error(FormatErrorKind::kModeBlockMismatch);
      return error(FormatErrorKind::kMissingReasoningBlock);
    }
    const std::size_t close = find(kThinkClose);
    if (close == std::string_view::npos) {
      return error(FormatErrorKind::kMissingReasoningBlock, "unterminated [think]");
    }
    std::string_view reasoning = raw_.substr(pos_, close - pos_);
    if (is_blank(reasoning)) {
      return error(FormatErrorKind::kMissingReasoningBlock, "empty reasoning");
    }
    out.reasoning_text = std::string(reasoning);
    pos_ = close + kThinkClose.size();
    return std::nullopt;
  }

  std::optional<FormatError> parse_no_think_block() {
    if (!consume(kNoThinkOpen)) {
      if (at(kThinkOpen)) return error(FormatErrorKind::kModeBlockMismatch);
      return error(FormatErrorKind::kMissingReasoningBlock);
    }
    if (consume("\n") && consume(kNoThinkClose)) return std::nullopt;
    if (find(kNoThinkClose) != std::string_view::npos) {
      return error(FormatErrorKind::kNonEmptyNoThinkBody);
    }
    return error(FormatErrorKind::kMissingReasoningBlock,
                 "unterminated [no_think]");
  }

  bool at(std::string_view token) const {
    return end_ - pos_ >= token.size() && raw_.substr(pos_, token.size()) == token;
  }

  bool consume(std::string_view token) {
    if (!at(token)) return false;
    pos_ += token.size();
    return true;
  }

  std::size_t find(std::string_view token) const {
    const std::size_t hit = raw_.substr(0, end_).find(token, pos_);
    return hit;
  }

  void skip_space() {
    while (pos_ < end_ && is_space(raw_[pos_])) ++pos_;
  }

  FormatError error(FormatErrorKind kind, std::string detail = {}) const {
    return FormatError{kind, pos_, std::move(detail)};
  }

  ParseResult fail(FormatErrorKind kind, std::string detail = {}) const {
    return error(kind, std::move(detail));
  }

  std::string_view raw_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

}  // namespace

std::string_view to_string(ReasoningMode mode) {
  return mode == ReasoningMode::kThink ? "think" : "no_think";
}

std::optional<ReasoningMode> reasoning_mode_from_string(std::string_view name) {
  if (name == "think") return ReasoningMode::kThink;
  if (name == "no_think") return ReasoningMode::kNoThink;
  return std::nullopt;
}

std::string_view to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::kMissingModeTag: return "MissingModeTag";
    case FormatErrorKind::kUnknownMode: return "UnknownMode";
    case FormatErrorKind::kMissingReasoningBlock: return "MissingReasoningBlock";
    case FormatErrorKind::kModeBlockMismatch: return "ModeBlockMismatch";
    case FormatErrorKind::kNonEmptyNoThinkBody: return "NonEmptyNoThinkBody";
    case FormatErrorKind::kMalformedToolCallJson: return "MalformedToolCallJson";
    case FormatErrorKind::kTrailingGarbage: return "TrailingGarbage";
  }
  return "Unknown";
}

bool same_structure(const ParsedResponse& a, const ParsedResponse& b) {
  return a.mode == b.mode && a.reasoning_text == b.reasoning_text &&
         a.payload == b.payload;
}

ParseResult parse_response(std::string_view raw) { return Parser(raw).run(); }

int format_reward(std::string_view raw) {
  return std::holds_alternative<ParsedResponse>(parse_response(raw)) ? 1 : 0;
}

std::string_view extract_mode_prefix(ReasoningMode mode) {
  return mode == ReasoningMode::kThink ? kThinkPrefix : kNoThinkPrefix;
}

ToolCalls tool_calls_from_json(const Json& array) {
  if (!array.is_array()) throw std::invalid_argument("tool_call body is not an array");
  if (array.empty()) throw std::invalid_argument("tool_call array is empty");
  ToolCalls calls;
  calls.reserve(array.size());
  for (const auto& item : array) {
    if (!item.is_object() || item.size() != 2 || !item.contains("name") ||
        !item.contains("arguments")) {
      throw std::invalid_argument("call must have exactly name and arguments");
    }
    const auto& name = item.at("name");
    const auto& args = item.at("arguments");
    if (!name.is_string()) throw std::invalid_argument("name must be a string");
    if (!args.is_object()) throw std::invalid_argument("arguments must be an object");
    auto n = name.get<std::string>();
    if (n.empty() || has_space(n)) {
      throw std::invalid_argument("name must be non-empty without whitespace");
    }
    calls.push_back(ToolCall{std::move(n), args});
  }
  return calls;
}

Json tool_calls_to_json(const ToolCalls& calls) {
  Json array = Json::array();
  for (const auto& c : calls) {
    array.push_back(Json{{"name", c.name}, {"arguments", c.arguments}});
  }
  return array;
}

std::string render_tool_calls(const ToolCalls& calls) {
  return tool_calls_to_json(calls).dump(-1, ' ', false,
                                        Json::error_handler_t::replace);
}

std::string render_response(const ParsedResponse& r) {
  std::string out(extract_mode_prefix(r.mode));
  if (r.mode == ReasoningMode::kThink) {
    out += r.reasoning_text.value_or(std::string{});
    out += kThinkClose;
  }
  if (const auto* calls = std::get_if<ToolCalls>(&r.payload)) {
    out += kToolCallOpen;
    out += render_tool_calls(*calls);
    out += kToolCallClose;
  } else {
    out += std::get<UserText>(r.payload).text;
  }
  return out;
}

std::size_t whitespace_token_count(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

bool is_renderable(const ParsedResponse& r) {
  if (r.mode == ReasoningMode::kThink) {
    if (!r.reasoning_text || is_blank(*r.reasoning_text)) return false;
    if (r.reasoning_text->find(kThinkClose) != std::string::npos) return false;
  } else if (r.reasoning_text) {
    return false;
  }
  if (const auto* calls = std::get_if<ToolCalls>(&r.payload)) {
    if (calls->empty()) return false;
    for (const auto& c : *calls) {
      if (c.name.empty() || has_space(c.name) || !c.arguments.is_object()) {
        return false;
      }
    }
    return true;
  }
  const auto& text = std::get<UserText>(r.payload).text;
  if (!text.empty() && (is_space(text.front()) || is_space(text.back()))) {
    return false;
  }
  return find_reserved_tag(text) == std::string::npos;
}

}  // namespace autothink
