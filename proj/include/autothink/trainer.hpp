#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autothink/grpo_core.hpp"
#include "autothink/policy.hpp"
#include "autothink/reward_engine.hpp"
#include "autothink/rng.hpp"
#include "autothink/snapshot.hpp"
#include "autothink/toy_env.hpp"

namespace autothink {

enum class EntropyRegime {
  kDecoupled,  // per-mode gated bonus with adaptive long-mode coefficient
  kFixedGate,  // one coefficient, gated on the batch mean entropy
};

struct TrainConfig {
  std::size_t group_size = 8;  // G
  std::size_t batch_prompts = 16;
  std::size_t steps = 1000;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
  ClipConfig clip;
  EntropyControllerState entropy;
  EntropyRegime regime = EntropyRegime::kDecoupled;
  double fixed_beta = 0.1;    // kFixedGate only
  double fixed_target = 0.1;  // kFixedGate only
  RewardConfig reward;
  DifficultyMix difficulty_mix = kDefaultMix;

  // Toy substrate.
  std::size_t num_symbols = 4;  // K
  std::size_t task_pool_size = 512;
  std::uint64_t env_seed = 0;
  double init_answer_margin = 2.0;
  std::size_t updates_per_batch = 1;
  bool parallel = true;

  // Throws std::invalid_argument with the first violated invariant.
  void validate() const;
};

struct Rollout {
  std::uint64_t task_id = 0;
  ReasoningMode mode = ReasoningMode::kNoThink;
  std::size_t answer = 0;  // sampled answer symbol
  std::string emitted_text;
  std::size_t token_length = 0;
  std::vector<TrajectoryStep> steps;  // [mode decision, answer]
  RewardBreakdown reward;
};

Rollout sample_rollout(const PolicyParams& params, const SyntheticTask& task,
                       CounterRng& rng, const RewardConfig& reward_cfg = {});

// Step contexts of a finished rollout, in the same order as Rollout::steps.
std::array<StepContext, 2> rollout_contexts(const SyntheticTask& task, ReasoningMode mode,
                                            std::size_t num_symbols);

// G rollouts for each of the given prompts, rollout (p, g) drawing from the
// stream (seed, step, p, g). Output index is p * G + g.
std::vector<Rollout> sample_batch_serial(const PolicyParams& params,
                                         std::span<const SyntheticTask* const> prompts,
                                         std::size_t group_size, std::uint64_t seed,
                                         std::uint64_t step, const RewardConfig& reward_cfg);
std::vector<Rollout> sample_batch_parallel(const PolicyParams& params,
                                           std::span<const SyntheticTask* const> prompts,
                                           std::size_t group_size, std::uint64_t seed,
                                           std::uint64_t step, const RewardConfig& reward_cfg);

// Per-step log-prob/entropy/jacobian rows for a batch under `params`.
struct BatchEvaluation {
  std::vector<TrajectoryStep> steps;
  std::vector<double> d_logprob;  // steps.size() x params.size(), row-major
  std::vector<double> d_entropy;
};

BatchEvaluation evaluate_batch_serial(const PolicyParams& params,
                                      std::span<const SyntheticTask* const> prompts,
                                      std::size_t group_size, std::span<const Rollout> rollouts);
BatchEvaluation evaluate_batch_parallel(const PolicyParams& params,
                                        std::span<const SyntheticTask* const> prompts,
                                        std::size_t group_size, std::span<const Rollout> rollouts);

// Observer hooks; both optional.
struct TrainHooks {
  std::function<void(const TrainingSnapshot&)> on_snapshot;
  // Debug side channel with the raw rollouts of every step.
  std::function<void(std::size_t step, std::span<const Rollout>)> on_batch;
};

struct TrainResult {
  std::vector<TrainingSnapshot> snapshots;
  PolicyParams params;
  EntropyControllerState controller;
  std::vector<SyntheticTask> tasks;  // training pool
};

// Throws std::runtime_error when the loss or parameters become non-finite.
TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks = {});

struct EvalResult {
  double accuracy = 0.0;
  double mean_token_length = 0.0;
  double thinking_rate = 0.0;
  std::size_t count = 0;
};

// Greedy decoding. With `mode` set, the mode decision is pinned as if its
// prefix were prepended and only the answer head decides.
EvalResult forced_mode_eval(const PolicyParams& params, std::span<const SyntheticTask> tasks,
                            std::optional<ReasoningMode> mode);

// Snapshot statistics for one batch; the trainer uses the same routine.
TrainingSnapshot summarize_batch(long step, std::span<const Rollout> rollouts, double beta_l,
                                 double loss);

double thinking_rate(std::span<const Rollout> rollouts);

}  // namespace autothink
