#include "autothink/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace autothink {

PolicyParams::PolicyParams(std::size_t num_symbols) : k_(num_symbols) {
  if (num_symbols < 2) throw std::invalid_argument("PolicyParams: K < 2");
  std::size_t off = 0;
  for (Head h : {Head::kMode, Head::kNoThinkAnswer, Head::kThinkAnswer}) {
    offsets_[static_cast<std::size_t>(h)] = off;
    off += num_actions(h) * num_features(h);
  }
  flat_.assign(off, 0.0);
}

std::size_t PolicyParams::num_actions(Head head) const {
  return head == Head::kMode ? 2 : k_;
}

std::size_t PolicyParams::num_features(Head head) const {
  switch (head) {
    case Head::kMode: return 1 + kNumDifficulties;
    case Head::kNoThinkAnswer: return 1 + kNumDifficulties * k_;
    case Head::kThinkAnswer: return 1 + 2 * k_;
  }
  return 0;
}

std::size_t PolicyParams::offset(Head head) const {
  return offsets_[static_cast<std::size_t>(head)];
}

double& PolicyParams::weight(Head head, std::size_t action, std::size_t feature) {
  return flat_[offset(head) + action * num_features(head) + feature];
}

double PolicyParams::weight(Head head, std::size_t action, std::size_t feature) const {
  return flat_[offset(head) + action * num_features(head) + feature];
}

bool PolicyParams::all_finite() const {
  return std::all_of(flat_.begin(), flat_.end(), [](double v) { return std::isfinite(v); });
}

StepContext mode_context(Difficulty d) {
  return StepContext{Head::kMode, {0, 1 + static_cast<std::size_t>(d), 0}, 2};
}

StepContext no_think_context(std::size_t num_symbols, Difficulty d, std::size_t observable) {
  return StepContext{Head::kNoThinkAnswer,
                     {0, 1 + static_cast<std::size_t>(d) * num_symbols + observable, 0},
                     2};
}

StepContext think_context(std::size_t num_symbols, std::size_t observable, std::size_t hint) {
  return StepContext{Head::kThinkAnswer, {0, 1 + observable, 1 + num_symbols + hint}, 3};
}

StepStats policy_step_stats(const PolicyParams& params, const StepContext& ctx) {
  const std::size_t n = params.num_actions(ctx.head);
  StepStats out;
  out.logits.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    double z = 0.0;
    for (std::size_t f = 0; f < ctx.num_active; ++f) {
      z += params.weight(ctx.head, a, ctx.features[f]);
    }
    out.logits[a] = z;
  }
  const double zmax = *std::max_element(out.logits.begin(), out.logits.end());
  double sum = 0.0;
  for (double z : out.logits) sum += std::exp(z - zmax);
  const double lse = zmax + std::log(sum);
  out.logprobs.resize(n);
  double h = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    out.logprobs[a] = out.logits[a] - lse;
    const double p = std::exp(out.logprobs[a]);
    h -= p * out.logprobs[a];
  }
  out.entropy = std::max(0.0, h);
  return out;
}

void policy_step_jacobians(const PolicyParams& params, const StepContext& ctx,
                           const StepStats& stats, std::size_t action,
                           std::span<double> d_logprob, std::span<double> d_entropy) {
  if (d_logprob.size() != params.size() || d_entropy.size() != params.size()) {
    throw std::invalid_argument("policy_step_jacobians: output size mismatch");
  }
  std::fill(d_logprob.begin(), d_logprob.end(), 0.0);
  std::fill(d_entropy.begin(), d_entropy.end(), 0.0);

  const std::size_t n = params.num_actions(ctx.head);
  const std::size_t nf = params.num_features(ctx.head);
  const std::size_t base = params.offset(ctx.head);
  for (std::size_t b = 0; b < n; ++b) {
    const double p = std::exp(stats.logprobs[b]);
    // d logp(a)/dz_b = [a==b] - p_b ;  dH/dz_b = -p_b (log p_b + H)
    const double g_logp = (b == action ? 1.0 : 0.0) - p;
    const double g_ent = -p * (stats.logprobs[b] + stats.entropy);
    for (std::size_t f = 0; f < ctx.num_active; ++f) {
      const std::size_t idx = base + b * nf + ctx.features[f];
      d_logprob[idx] += g_logp;
      d_entropy[idx] += g_ent;
    }
  }
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(
      std::distance(values.begin(), std::max_element(values.begin(), values.end())));
}

PolicyParams initial_policy(std::size_t num_symbols, double answer_margin) {
  PolicyParams p(num_symbols);
  for (std::size_t o = 0; o < num_symbols; ++o) {
    for (int d = 0; d < kNumDifficulties; ++d) {
      p.weight(Head::kNoThinkAnswer, o, 1 + static_cast<std::size_t>(d) * num_symbols + o) =
          answer_margin;
    }
    p.weight(Head::kThinkAnswer, o, 1 + o) = answer_margin;
  }
  return p;
}

}  // namespace autothink
