#pragma once

// Offline data preparation: pass@k stratification, halving of the easy and
// hard tiers, reward-variance refinement and the mixed think/no-think SFT set.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autothink/difficulty.hpp"
#include "autothink/reward_engine.hpp"

namespace autothink {

struct SampleRecord {
  Json id;  // string or integer
  std::string prompt;
  GroundTruth ground_truth;
  std::vector<bool> correctness_bits;
  std::optional<Difficulty> difficulty;
  std::optional<std::vector<double>> reward_history;
  std::optional<double> variance;
};

struct TurnCandidate {
  std::string turn_id;
  // Either a JSON array of tool calls or plain user-facing text.
  std::string ground_truth_label;
  bool nothink_correct = false;
  // A complete think-mode response in the template grammar.
  std::optional<std::string> think_answer;
  bool think_correct = false;
};

struct SftTurn {
  std::string turn_id;
  ReasoningMode mode = ReasoningMode::kNoThink;
  std::string label_text;
};

struct SftMix {
  std::vector<SftTurn> turns;
  double thinking_rate = 0.0;  // 0 when no turn was emitted
};

inline constexpr double kDefaultKeepFraction = 0.45;

// k/k correct is easy, 0/k hard, anything else medium. Throws
// std::invalid_argument when a record does not have exactly k bits.
Difficulty difficulty_from_bits(const std::vector<bool>& bits, std::size_t k);
std::vector<SampleRecord> stratify(std::vector<SampleRecord> records, std::size_t k);

// Drops ceil(n_easy/2) easy and ceil(n_hard/2) hard records chosen uniformly
// without replacement; survivors keep their input order. Throws
// std::invalid_argument if a record has no difficulty.
std::vector<SampleRecord> rebalance(const std::vector<SampleRecord>& records,
                                    std::uint64_t seed);

// Sample variance with the n-1 denominator. Throws for n < 2.
double reward_variance(std::span<const double> history);

// Sets `variance` from `reward_history` on every record.
void assign_variances(std::vector<SampleRecord>& records);

// Sorted by (variance, id) ascending, first ceil(keep_fraction * n) kept.
std::vector<SampleRecord> variance_refine(std::vector<SampleRecord> records,
                                          double keep_fraction = kDefaultKeepFraction);

// Ceil that ignores floating noise below 1e-9 (0.45 * 606 -> 273, not 274).
std::size_t ceil_count(double x);

SftMix build_sft_mix(const std::vector<TurnCandidate>& candidates);

// Full prepare-data chain: stratify -> rebalance -> (variance -> refine).
// Refinement is skipped when no record carries a reward history.
struct PrepareOptions {
  double keep_fraction = kDefaultKeepFraction;
  std::uint64_t seed = 0;
};
std::vector<SampleRecord> prepare_records(std::vector<SampleRecord> records,
                                          const PrepareOptions& opts);

Json to_json(const SampleRecord& r);
SampleRecord sample_record_from_json(const Json& j);
Json to_json(const SftTurn& t);
TurnCandidate turn_candidate_from_json(const Json& j);

// JSONL readers throw DataError with the offending line number.
std::vector<SampleRecord> read_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<SampleRecord>& records);
std::vector<TurnCandidate> read_turn_candidates(const std::filesystem::path& path);
void write_sft_turns(const std::filesystem::path& path, const std::vector<SftTurn>& turns);

}  // namespace autothink
