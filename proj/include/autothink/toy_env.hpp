#pragma once

// Synthetic single-turn tool-use tasks with controllable difficulty.
//
// Every task has an observable symbol (in the prompt) and a latent symbol
// that think mode reveals before answering. The correct call is
// catalog[answer](arg=answer), with
//   easy:   answer = observable            (latent = observable)
//   medium: answer = perm(observable)      (latent = answer)
//   hard:   answer = latent, drawn independently of the observable
// `perm` is one fixed permutation per environment, so no-think can learn it.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "autothink/difficulty.hpp"
#include "autothink/reward_engine.hpp"
#include "autothink/template_codec.hpp"

namespace autothink {

using DifficultyMix = std::array<double, kNumDifficulties>;

// Rounded task proportions used as the default training mix.
inline constexpr DifficultyMix kDefaultMix = {0.47, 0.21, 0.32};

struct SyntheticTask {
  std::uint64_t task_id = 0;
  Difficulty difficulty = Difficulty::kEasy;
  std::size_t observable = 0;
  std::size_t latent = 0;
  std::size_t answer = 0;
  std::vector<std::string> catalog;
  ToolCall ground_truth;
};

struct Environment {
  std::size_t num_symbols = 4;
  std::uint64_t env_seed = 0;

  std::vector<std::size_t> medium_permutation() const;
  std::vector<std::string> catalog() const;
};

// Per-difficulty counts for `count` tasks: floor of mix*count, remainder
// handed out by largest fractional part (ties to the easier tier).
std::array<std::size_t, kNumDifficulties> difficulty_counts(std::size_t count,
                                                            const DifficultyMix& mix);

// Throws std::invalid_argument when K < 2 or the mix is not a distribution.
std::vector<SyntheticTask> generate_tasks(std::uint64_t seed, std::size_t count,
                                          const DifficultyMix& mix, std::size_t num_symbols,
                                          std::uint64_t env_seed = 0);

ToolCall make_call(const std::vector<std::string>& catalog, std::size_t symbol);

// Text a rollout emits for a chosen mode and answer. Think responses carry a
// placeholder reasoning block five times the no-think token length.
ParsedResponse rollout_response(const SyntheticTask& task, ReasoningMode mode,
                                std::size_t chosen_answer);
std::string rollout_text(const SyntheticTask& task, ReasoningMode mode,
                         std::size_t chosen_answer);

GroundTruth task_ground_truth(const SyntheticTask& task);

// Closed-form expected answer reward for each difficulty and mode.
struct OracleRow {
  Difficulty difficulty;
  ReasoningMode mode;
  double best_accuracy;        // best achievable given the information available
  double best_expected_reward;
  double uniform_accuracy;     // untrained uniform answer head
  double uniform_expected_reward;
};

std::vector<OracleRow> env_oracle_table(std::size_t num_symbols);
ReasoningMode oracle_mode(Difficulty d, std::size_t num_symbols);

double expected_answer_reward(ReasoningMode mode, double accuracy);

}  // namespace autothink
