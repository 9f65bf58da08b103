#pragma once

// Linear-softmax toy policy with three heads over one-hot task features:
//   mode head      [bias, difficulty]            -> {think, no_think}
//   no-think head  [bias, (difficulty, observable)] -> K answers
//   think head     [bias, observable, hint]       -> K answers
// All parameters live in one flat vector; heads are row-major views into it.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "autothink/difficulty.hpp"

namespace autothink {

enum class Head { kMode = 0, kNoThinkAnswer = 1, kThinkAnswer = 2 };

// Mode-head action indices; they coincide with the trajectory mode flag.
inline constexpr std::size_t kThinkAction = 0;
inline constexpr std::size_t kNoThinkAction = 1;

class PolicyParams {
 public:
  PolicyParams() = default;
  explicit PolicyParams(std::size_t num_symbols);

  std::size_t num_symbols() const { return k_; }
  std::size_t size() const { return flat_.size(); }

  std::size_t num_actions(Head head) const;
  std::size_t num_features(Head head) const;
  std::size_t offset(Head head) const;

  // Weight for (action row, feature column) of a head.
  double& weight(Head head, std::size_t action, std::size_t feature);
  double weight(Head head, std::size_t action, std::size_t feature) const;

  std::span<double> flat_view() { return flat_; }
  std::span<const double> flat_view() const { return flat_; }

  bool all_finite() const;

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;

 private:
  std::size_t k_ = 0;
  std::array<std::size_t, 3> offsets_{};
  std::vector<double> flat_;
};

// Active one-hot feature columns for one decision (bias column included).
struct StepContext {
  Head head = Head::kMode;
  std::array<std::size_t, 3> features{};
  std::size_t num_active = 0;
};

StepContext mode_context(Difficulty d);
StepContext no_think_context(std::size_t num_symbols, Difficulty d, std::size_t observable);
StepContext think_context(std::size_t num_symbols, std::size_t observable, std::size_t hint);

struct StepStats {
  std::vector<double> logits;
  std::vector<double> logprobs;
  double entropy = 0.0;
};

StepStats policy_step_stats(const PolicyParams& params, const StepContext& ctx);

// Analytic d logprob(action)/d theta and d H/d theta, written densely into
// outputs of length params.size() (overwritten, not accumulated).
void policy_step_jacobians(const PolicyParams& params, const StepContext& ctx,
                           const StepStats& stats, std::size_t action,
                           std::span<double> d_logprob, std::span<double> d_entropy);

std::size_t argmax(std::span<const double> values);

// Copy-the-observable prior on both answer heads with logit margin `margin`;
// mode head left uniform.
PolicyParams initial_policy(std::size_t num_symbols, double answer_margin);

}  // namespace autothink
