#include "autothink/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "autothink/jsonl.hpp"
#include "autothink/rng.hpp"

namespace autothink {
namespace {

// Integers before strings, each in natural order.
bool id_less(const Json& a, const Json& b) {
  if (a.is_number_integer() != b.is_number_integer()) return a.is_number_integer();
  if (a.is_number_integer()) return a.get<std::int64_t>() < b.get<std::int64_t>();
  return a.get<std::string>() < b.get<std::string>();
}

void check_id(const Json& id) {
  if (!id.is_string() && !id.is_number_integer()) {
    throw std::invalid_argument("id must be a string or an integer");
  }
}

ResponsePayload label_payload(const std::string& label) {
  const auto j = Json::parse(label, nullptr, /*allow_exceptions=*/false);
  if (j.is_array()) {
    try {
      return tool_calls_from_json(j);
    } catch (const std::exception&) {
      // Not a call list after all; fall through to plain text.
    }
  }
  return UserText{label};
}

void write_lines(const std::filesystem::path& path, const std::vector<Json>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& j : lines) out << j.dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

Difficulty difficulty_from_bits(const std::vector<bool>& bits, std::size_t k) {
  if (bits.size() != k) {
    throw std::invalid_argument("expected " + std::to_string(k) + " correctness bits, got " +
                                std::to_string(bits.size()));
  }
  const auto correct = static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
  if (correct == k) return Difficulty::kEasy;
  if (correct == 0) return Difficulty::kHard;
  return Difficulty::kMedium;
}

std::vector<SampleRecord> stratify(std::vector<SampleRecord> records, std::size_t k) {
  if (k == 0) throw std::invalid_argument("stratify: k must be >= 1");
  for (auto& r : records) r.difficulty = difficulty_from_bits(r.correctness_bits, k);
  return records;
}

std::vector<SampleRecord> rebalance(const std::vector<SampleRecord>& records,
                                    std::uint64_t seed) {
  std::vector<bool> removed(records.size(), false);
  for (Difficulty tier : {Difficulty::kEasy, Difficulty::kHard}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!records[i].difficulty) throw std::invalid_argument("rebalance: record not stratified");
      if (*records[i].difficulty == tier) idx.push_back(i);
    }
    const std::size_t drop = (idx.size() + 1) / 2;
    CounterRng rng({static_cast<std::uint64_t>(StreamTag::kRebalance), seed,
                    static_cast<std::uint64_t>(tier)});
    for (std::size_t i = 0; i < drop; ++i) {
      std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
      removed[idx[i]] = true;
    }
  }
  std::vector<SampleRecord> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!removed[i]) out.push_back(records[i]);
  }
  return out;
}

double reward_variance(std::span<const double> history) {
  if (history.size() < 2) throw std::invalid_argument("reward_variance: need n >= 2");
  const double n = static_cast<double>(history.size());
  const double mean = std::accumulate(history.begin(), history.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : history) ss += (r - mean) * (r - mean);
  return ss / (n - 1.0);
}

void assign_variances(std::vector<SampleRecord>& records) {
  for (auto& r : records) {
    if (!r.reward_history) throw std::invalid_argument("record without reward_history");
    r.variance = reward_variance(*r.reward_history);
  }
}

std::size_t ceil_count(double x) {
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

std::vector<SampleRecord> variance_refine(std::vector<SampleRecord> records,
                                          double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw std::invalid_argument("keep_fraction must be in (0, 1]");
  }
  for (const auto& r : records) {
    if (!r.variance) throw std::invalid_argument("variance_refine: record without variance");
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const SampleRecord& a, const SampleRecord& b) {
                     if (*a.variance != *b.variance) return *a.variance < *b.variance;
                     return id_less(a.id, b.id);
                   });
  const auto keep =
      std::min(records.size(), ceil_count(keep_fraction * static_cast<double>(records.size())));
  records.resize(keep);
  return records;
}

SftMix build_sft_mix(const std::vector<TurnCandidate>& candidates) {
  SftMix mix;
  std::size_t think = 0;
  for (const auto& c : candidates) {
    if (c.nothink_correct) {
      ParsedResponse r;
      r.mode = ReasoningMode::kNoThink;
      r.payload = label_payload(c.ground_truth_label);
      auto text = render_response(r);
      if (!std::holds_alternative<ParsedResponse>(parse_response(text))) {
        throw std::invalid_argument("turn " + c.turn_id + ": label does not fit the template");
      }
      mix.turns.push_back(SftTurn{c.turn_id, ReasoningMode::kNoThink, std::move(text)});
    } else if (c.think_correct) {
      if (!c.think_answer) {
        throw std::invalid_argument("turn " + c.turn_id + ": think_correct without think_answer");
      }
      const auto parsed = parse_response(*c.think_answer);
      const auto* ok = std::get_if<ParsedResponse>(&parsed);
      if (!ok || ok->mode != ReasoningMode::kThink) {
        throw std::invalid_argument("turn " + c.turn_id +
                                    ": think_answer is not a valid think-mode response");
      }
      mix.turns.push_back(SftTurn{c.turn_id, ReasoningMode::kThink, render_response(*ok)});
      ++think;
    }
  }
  if (!mix.turns.empty()) {
    mix.thinking_rate = static_cast<double>(think) / static_cast<double>(mix.turns.size());
  }
  return mix;
}

std::vector<SampleRecord> prepare_records(std::vector<SampleRecord> records,
                                          const PrepareOptions& opts) {
  if (records.empty()) return records;
  const std::size_t k = records.front().correctness_bits.size();
  records = rebalance(stratify(std::move(records), k), opts.seed);
  const auto with_history = std::count_if(records.begin(), records.end(), [](const auto& r) {
    return r.reward_history.has_value();
  });
  if (with_history == 0) return records;
  if (static_cast<std::size_t>(with_history) != records.size()) {
    throw std::invalid_argument("reward_history present on some records but not all");
  }
  assign_variances(records);
  return variance_refine(std::move(records), opts.keep_fraction);
}

Json to_json(const SampleRecord& r) {
  Json j = {{"id", r.id},
            {"prompt", r.prompt},
            {"expected", to_json(r.ground_truth)},
            {"correctness_bits", r.correctness_bits}};
  if (r.reward_history) j["reward_history"] = *r.reward_history;
  if (r.difficulty) j["difficulty"] = std::string(to_string(*r.difficulty));
  if (r.variance) j["variance"] = *r.variance;
  return j;
}

SampleRecord sample_record_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  SampleRecord r;
  r.id = j.at("id");
  check_id(r.id);
  r.prompt = j.at("prompt").get<std::string>();
  r.ground_truth = ground_truth_from_json(j.at("expected"));
  const auto& bits = j.at("correctness_bits");
  if (!bits.is_array()) throw std::invalid_argument("correctness_bits must be an array");
  for (const auto& b : bits) {
    if (!b.is_boolean()) throw std::invalid_argument("correctness_bits entries must be booleans");
    r.correctness_bits.push_back(b.get<bool>());
  }
  if (j.contains("reward_history") && !j.at("reward_history").is_null()) {
    const auto& h = j.at("reward_history");
    if (!h.is_array()) throw std::invalid_argument("reward_history must be an array");
    std::vector<double> hist;
    for (const auto& v : h) {
      if (!v.is_number()) throw std::invalid_argument("reward_history entries must be numbers");
      hist.push_back(v.get<double>());
    }
    r.reward_history = std::move(hist);
  }
  if (j.contains("difficulty") && !j.at("difficulty").is_null()) {
    r.difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
    if (!r.difficulty) throw std::invalid_argument("unknown difficulty");
  }
  if (j.contains("variance") && !j.at("variance").is_null()) {
    r.variance = j.at("variance").get<double>();
    if (*r.variance < 0.0) throw std::invalid_argument("variance must be non-negative");
  }
  return r;
}

Json to_json(const SftTurn& t) {
  return Json{{"turn_id", t.turn_id},
              {"mode", std::string(to_string(t.mode))},
              {"label_text", t.label_text}};
}

TurnCandidate turn_candidate_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("turn candidate must be a JSON object");
  TurnCandidate c;
  const auto& id = j.at("turn_id");
  c.turn_id = id.is_string() ? id.get<std::string>() : id.dump();
  c.ground_truth_label = j.at("ground_truth_label").get<std::string>();
  c.nothink_correct = j.at("nothink_correct").get<bool>();
  c.think_correct = j.value("think_correct", false);
  if (j.contains("think_answer") && !j.at("think_answer").is_null()) {
    c.think_answer = j.at("think_answer").get<std::string>();
  }
  if (c.think_correct && !c.think_answer) {
    throw std::invalid_argument("think_correct requires think_answer");
  }
  return c;
}

std::vector<SampleRecord> read_records(const std::filesystem::path& path) {
  std::vector<SampleRecord> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) {
    out.push_back(sample_record_from_json(j));
  });
  return out;
}

void write_records(const std::filesystem::path& path, const std::vector<SampleRecord>& records) {
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  write_lines(path, lines);
}

std::vector<TurnCandidate> read_turn_candidates(const std::filesystem::path& path) {
  std::vector<TurnCandidate> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) {
    out.push_back(turn_candidate_from_json(j));
  });
  return out;
}

void write_sft_turns(const std::filesystem::path& path, const std::vector<SftTurn>& turns) {
  std::vector<Json> lines;
  lines.reserve(turns.size());
  for (const auto& t : turns) lines.push_back(to_json(t));
  write_lines(path, lines);
}

}  // namespace autothink
