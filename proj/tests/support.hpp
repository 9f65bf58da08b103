#pragma once

// Independent reference implementations and fixture builders shared by the
// unit tests and the acceptance binary. Nothing here calls the code under
// test for the quantity it checks.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "autothink/data_pipeline.hpp"
#include "autothink/grpo_core.hpp"
#include "autothink/policy.hpp"
#include "autothink/template_codec.hpp"

namespace autothink::testing {

// Two-pass mean / population std in long double.
inline std::vector<double> brute_force_advantage(const std::vector<double>& r) {
  long double mean = 0;
  for (double x : r) mean += x;
  mean /= static_cast<long double>(r.size());
  long double var = 0;
  for (double x : r) var += (x - mean) * (x - mean);
  var /= static_cast<long double>(r.size());
  const long double sd = std::sqrt(var);
  std::vector<double> out(r.size(), 0.0);
  if (sd == 0) return out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    out[i] = static_cast<double>((r[i] - mean) / (sd + 1e-6L));
  }
  return out;
}

// (1/N) sum -min(rho A, clip(rho, 1-eps, 1+eps) A), no entropy term.
inline double plain_clipped_loss(const std::vector<TrajectoryStep>& steps,
                                 const std::vector<double>& adv, double eps) {
  double sum = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double rho = std::exp(steps[i].logprob_new - steps[i].logprob_old);
    const double clipped = std::min(std::max(rho, 1.0 - eps), 1.0 + eps);
    sum += -std::min(rho * adv[i], clipped * adv[i]);
  }
  return sum / static_cast<double>(steps.size());
}

// Value equality with integral floats equal to integers, key order ignored,
// strings never equal to numbers.
inline bool loose_json_equal(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return a.get<long double>() == b.get<long double>();
  if (a.type() != b.type()) return false;
  if (a.is_object()) {
    if (a.size() != b.size()) return false;
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key()) || !loose_json_equal(it.value(), b.at(it.key()))) return false;
    }
    return true;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!loose_json_equal(a[i], b[i])) return false;
    }
    return true;
  }
  return a == b;
}

// Tries every ordering of `b`.
inline bool permutation_match(const ToolCalls& a, ToolCalls b) {
  if (a.size() != b.size()) return false;
  std::vector<std::size_t> idx(b.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  do {
    bool all = true;
    for (std::size_t i = 0; i < a.size() && all; ++i) {
      all = a[i].name == b[idx[i]].name && loose_json_equal(a[i].arguments, b[idx[i]].arguments);
    }
    if (all) return true;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return false;
}

inline std::string random_word(std::mt19937_64& rng, std::size_t max_len = 8) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.,:;!?'\"()-+=/";
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string w;
  for (std::size_t i = len(rng); i > 0; --i) w += alphabet[pick(rng)];
  return w;
}

inline std::string random_sentence(std::mt19937_64& rng, std::size_t max_words = 12) {
  std::uniform_int_distribution<std::size_t> n(1, max_words);
  std::uniform_int_distribution<int> sep(0, 5);
  std::string s = random_word(rng);
  for (std::size_t i = n(rng); i > 1; --i) {
    s += sep(rng) == 0 ? "\n" : " ";
    s += random_word(rng);
  }
  return s;
}

inline Json random_json_value(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> kind(0, depth > 0 ? 6 : 4);
  switch (kind(rng)) {
    case 0: return std::uniform_int_distribution<int>(-1000, 1000)(rng);
    case 1: return std::uniform_real_distribution<double>(-100.0, 100.0)(rng);
    case 2: return random_sentence(rng, 3);
    case 3: return std::bernoulli_distribution(0.5)(rng);
    case 4: return nullptr;
    case 5: {
      Json arr = Json::array();
      for (int i = std::uniform_int_distribution<int>(0, 3)(rng); i > 0; --i) {
        arr.push_back(random_json_value(rng, depth - 1));
      }
      return arr;
    }
    default: {
      Json obj = Json::object();
      for (int i = std::uniform_int_distribution<int>(0, 3)(rng); i > 0; --i) {
        obj[random_word(rng, 6)] = random_json_value(rng, depth - 1);
      }
      return obj;
    }
  }
}

inline ToolCall random_call(std::mt19937_64& rng) {
  ToolCall c;
  static const char* names[] = {"get_weather", "search", "book", "f", "g", "lookup.v2"};
  c.name = names[std::uniform_int_distribution<int>(0, 5)(rng)];
  for (int i = std::uniform_int_distribution<int>(0, 4)(rng); i > 0; --i) {
    c.arguments[random_word(rng, 6)] = random_json_value(rng, 2);
  }
  return c;
}

inline ParsedResponse random_response(std::mt19937_64& rng) {
  ParsedResponse r;
  r.mode = std::bernoulli_distribution(0.5)(rng) ? ReasoningMode::kThink : ReasoningMode::kNoThink;
  if (r.mode == ReasoningMode::kThink) r.reasoning_text = random_sentence(rng, 20);
  if (std::bernoulli_distribution(0.6)(rng)) {
    ToolCalls calls;
    for (int i = std::uniform_int_distribution<int>(1, 3)(rng); i > 0; --i) {
      calls.push_back(random_call(rng));
    }
    r.payload = calls;
  } else {
    r.payload = UserText{random_sentence(rng)};
  }
  return r;
}

// Character ranges covered by structural tags (and the mode name) in a
// rendered response.
inline std::vector<std::size_t> tag_positions(const std::string& text) {
  static const char* tags[] = {"[mode]",     "[/mode]",      "[think]",     "[/think]",
                               "[no_think]", "[/no_think]",  "[tool_call]", "[/tool_call]"};
  std::vector<bool> mark(text.size(), false);
  for (const char* tag : tags) {
    const std::string t = tag;
    for (auto p = text.find(t); p != std::string::npos; p = text.find(t, p + 1)) {
      for (std::size_t i = 0; i < t.size(); ++i) mark[p + i] = true;
    }
  }
  // The mode name between [mode] and [/mode].
  const auto open = text.find("[mode]");
  const auto close = text.find("[/mode]");
  if (open != std::string::npos && close != std::string::npos) {
    for (std::size_t i = open + 6; i < close; ++i) mark[i] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mark.size(); ++i) {
    if (mark[i]) out.push_back(i);
  }
  return out;
}

// Fixture of `n` records with exact tier counts: easy all-true, hard
// all-false, medium a mix. Reward histories have distinct variances.
inline std::vector<SampleRecord> tier_fixture(std::size_t n_easy, std::size_t n_medium,
                                              std::size_t n_hard, std::size_t k = 8,
                                              std::uint64_t seed = 11) {
  std::mt19937_64 rng(seed);
  std::vector<Difficulty> tiers;
  tiers.insert(tiers.end(), n_easy, Difficulty::kEasy);
  tiers.insert(tiers.end(), n_medium, Difficulty::kMedium);
  tiers.insert(tiers.end(), n_hard, Difficulty::kHard);
  std::shuffle(tiers.begin(), tiers.end(), rng);
  std::vector<SampleRecord> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    SampleRecord r;
    r.id = static_cast<std::int64_t>(i);
    r.prompt = "prompt " + std::to_string(i);
    r.ground_truth = GroundTruth{ToolCalls{ToolCall{"f", Json{{"i", i}}}}};
    r.correctness_bits.assign(k, tiers[i] == Difficulty::kEasy);
    if (tiers[i] == Difficulty::kMedium) {
      const std::size_t correct = 1 + i % (k - 1);
      for (std::size_t b = 0; b < correct; ++b) r.correctness_bits[b] = true;
    }
    r.reward_history = std::vector<double>{u(rng), u(rng), u(rng), u(rng)};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace autothink::testing
