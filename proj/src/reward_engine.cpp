#include "autothink/reward_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace autothink {
namespace {

std::string_view trim(std::string_view s) {
  const auto space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

Json normalize_number(double v) {
  if (v == 0.0) return Json(0);  // folds -0
  if (std::isfinite(v) && std::trunc(v) == v &&
      v >= static_cast<double>(std::numeric_limits<std::int64_t>::min()) &&
      v < 9.2233720368547758e18) {
    return Json(static_cast<std::int64_t>(v));
  }
  return Json(v);
}

// Canonical key used to bucket calls before multiset comparison.
std::string call_key(const ToolCall& c) {
  return Json{{"name", c.name}, {"arguments", c.arguments}}.dump(
      -1, ' ', false, Json::error_handler_t::replace);
}

}  // namespace

Json canonicalize_json(const Json& value) {
  switch (value.type()) {
    case Json::value_t::object: {
      Json out = Json::object();
      for (const auto& [k, v] : value.items()) out[k] = canonicalize_json(v);
      return out;
    }
    case Json::value_t::array: {
      Json out = Json::array();
      for (const auto& v : value) out.push_back(canonicalize_json(v));
      return out;
    }
    case Json::value_t::number_float:
      return normalize_number(value.get<double>());
    case Json::value_t::number_unsigned: {
      const auto u = value.get<std::uint64_t>();
      if (u <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        return Json(static_cast<std::int64_t>(u));
      }
      return value;
    }
    default:
      return value;
  }
}

ToolCall canonicalize_call(const ToolCall& call) {
  return ToolCall{call.name, canonicalize_json(call.arguments)};
}

bool canonical_equal(const Json& a, const Json& b) {
  if (a.type() != b.type()) {
    // After canonicalization, integers and floats only share a value when the
    // float is non-integral, which cannot equal an integer.
    return false;
  }
  switch (a.type()) {
    case Json::value_t::object: {
      if (a.size() != b.size()) return false;
      auto ia = a.begin();
      auto ib = b.begin();
      for (; ia != a.end(); ++ia, ++ib) {
        if (ia.key() != ib.key() || !canonical_equal(*ia, *ib)) return false;
      }
      return true;
    }
    case Json::value_t::array: {
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (!canonical_equal(a[i], b[i])) return false;
      }
      return true;
    }
    case Json::value_t::number_float:
      return a.get<double>() == b.get<double>();
    default:
      return a == b;
  }
}

bool calls_match(std::span<const ToolCall> a, std::span<const ToolCall> b) {
  if (a.size() != b.size()) return false;
  std::vector<std::string> ka;
  std::vector<std::string> kb;
  ka.reserve(a.size());
  kb.reserve(b.size());
  for (const auto& c : a) ka.push_back(call_key(canonicalize_call(c)));
  for (const auto& c : b) kb.push_back(call_key(canonicalize_call(c)));
  std::sort(ka.begin(), ka.end());
  std::sort(kb.begin(), kb.end());
  return ka == kb;
}

bool payload_matches(const ResponsePayload& got, const ResponsePayload& expected) {
  if (got.index() != expected.index()) return false;
  if (const auto* calls = std::get_if<ToolCalls>(&got)) {
    return calls_match(*calls, std::get<ToolCalls>(expected));
  }
  return trim(std::get<UserText>(got).text) ==
         trim(std::get<UserText>(expected).text);
}

double answer_reward(const ParsedResponse& parsed, const GroundTruth& gt) {
  const bool correct = payload_matches(parsed.payload, gt.expected);
  if (parsed.mode == ReasoningMode::kNoThink) {
    return correct ? kRewardCorrectNoThink : kRewardWrongNoThink;
  }
  return correct ? kRewardCorrectThink : kRewardWrongThink;
}

RewardBreakdown composite_reward(std::string_view raw, const GroundTruth& gt,
                                 const RewardConfig& cfg) {
  RewardBreakdown out;
  auto result = parse_response(raw);
  const auto* parsed = std::get_if<ParsedResponse>(&result);
  if (parsed == nullptr) {
    out.total = cfg.invalid_format_reward;
    return out;
  }
  out.format = 1;
  out.answer = answer_reward(*parsed, gt);
  if (cfg.length_penalty_enabled && parsed->token_length < cfg.target_length) {
    out.length_penalty = -cfg.penalty_magnitude;
  }
  out.total = *out.answer + out.length_penalty;
  return out;
}

std::vector<RewardBreakdown> score_group(std::span<const std::string> raws,
                                         const GroundTruth& gt,
                                         const RewardConfig& cfg) {
  if (raws.empty()) throw std::invalid_argument("score_group: empty group");
  std::vector<RewardBreakdown> out(raws.size());
  const auto n = static_cast<std::ptrdiff_t>(raws.size());
#pragma omp parallel for schedule(static) if (n > 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = composite_reward(raws[i], gt, cfg);
  }
  return out;
}

Json to_json(const RewardBreakdown& r) {
  Json j;
  j["format"] = r.format;
  j["answer"] = r.answer ? Json(*r.answer) : Json(nullptr);
  j["length_penalty"] = r.length_penalty;
  j["total"] = r.total;
  return j;
}

GroundTruth ground_truth_from_json(const Json& expected) {
  if (!expected.is_object() || !expected.contains("type")) {
    throw std::invalid_argument("expected must be an object with a type");
  }
  const auto type = expected.at("type").get<std::string>();
  if (type == "tool_calls") {
    return GroundTruth{tool_calls_from_json(expected.at("calls"))};
  }
  if (type == "text") {
    return GroundTruth{UserText{expected.at("text").get<std::string>()}};
  }
  throw std::invalid_argument("unknown expected type: " + type);
}

Json to_json(const GroundTruth& gt) {
  if (const auto* calls = std::get_if<ToolCalls>(&gt.expected)) {
    return Json{{"type", "tool_calls"}, {"calls", tool_calls_to_json(*calls)}};
  }
  return Json{{"type", "text"}, {"text", std::get<UserText>(gt.expected).text}};
}

}  // namespace autothink
