#include "autothink/grpo_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace autothink {
namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string("non-finite ") + what);
  }
}

}  // namespace

bool EntropyControllerState::valid() const {
  return beta_long >= 0.0 && beta_long <= beta_max && beta_short >= 0.0 &&
         target_long > 0.0 && target_short > 0.0 && step_size >= 0.0;
}

std::vector<double> group_advantage(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("group_advantage: need at least two rewards");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  const double sd = std::sqrt(var);

  std::vector<double> adv(rewards.size(), 0.0);
  if (sd == 0.0) return adv;
  for (std::size_t j = 0; j < rewards.size(); ++j) {
    adv[j] = (rewards[j] - mean) / (sd + kAdvantageEpsilon);
  }
  return adv;
}

double entropy_coefficient(int mode_flag, double entropy,
                           const EntropyControllerState& st) {
  const double m = mode_flag == 1 ? 1.0 : 0.0;
  const double short_gate = entropy <= st.target_short ? 1.0 : 0.0;
  const double long_gate = entropy <= st.target_long ? 1.0 : 0.0;
  return st.beta_short * m * short_gate + st.beta_long * (1.0 - m) * long_gate;
}

LossReport compute_policy_loss(std::span<const TrajectoryStep> steps,
                               std::span<const double> advantages,
                               const ClipConfig& clip,
                               const EntropyControllerState& st) {
  if (steps.empty()) throw std::invalid_argument("compute_policy_loss: no steps");
  if (steps.size() != advantages.size()) {
    throw std::invalid_argument("compute_policy_loss: length mismatch");
  }

  LossReport report;
  report.per_step_beta.resize(steps.size());
  double surrogate = 0.0;
  double bonus = 0.0;
  double long_sum = 0.0, short_sum = 0.0;
  std::size_t long_n = 0, short_n = 0;

  // Fixed summation order; callers parallelize around this, not inside it.
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    const double a = advantages[i];
    check_finite(s.logprob_new, "logprob_new");
    check_finite(s.logprob_old, "logprob_old");
    check_finite(s.entropy, "entropy");
    check_finite(a, "advantage");
    const double ratio = std::exp(s.logprob_new - s.logprob_old);
    check_finite(ratio, "ratio");
    const double clipped = std::clamp(ratio, 1.0 - clip.eps_low, 1.0 + clip.eps_high);
    surrogate -= std::min(ratio * a, clipped * a);

    const double beta = entropy_coefficient(s.mode_flag, s.entropy, st);
    report.per_step_beta[i] = beta;
    bonus -= beta * s.entropy;

    if (s.mode_flag == 0) {
      long_sum += s.entropy;
      ++long_n;
    } else {
      short_sum += s.entropy;
      ++short_n;
    }
  }

  const double n = static_cast<double>(steps.size());
  report.surrogate_term = surrogate / n;
  report.entropy_term = bonus / n;
  report.loss = (surrogate + bonus) / n;
  if (long_n > 0) report.mean_entropy_long = long_sum / static_cast<double>(long_n);
  if (short_n > 0) report.mean_entropy_short = short_sum / static_cast<double>(short_n);
  return report;
}

EntropyControllerState update_adaptive_coeff(std::span<const double> long_step_entropies,
                                             const EntropyControllerState& st) {
  if (long_step_entropies.empty()) return st;
  double gap = 0.0;
  for (double h : long_step_entropies) gap += h - st.target_long;
  gap /= static_cast<double>(long_step_entropies.size());
  // d/d beta_l of mean((H - H_l) * beta_l) is mean(H - H_l).
  EntropyControllerState next = st;
  next.beta_long = std::clamp(st.beta_long - st.step_size * gap, 0.0, st.beta_max);
  return next;
}

double fixed_entropy_bonus(double mean_entropy, double beta, double target) {
  return mean_entropy <= target ? beta : 0.0;
}

double surrogate_logprob_weight(const TrajectoryStep& step, double advantage,
                                const ClipConfig& clip) {
  const double ratio = std::exp(step.logprob_new - step.logprob_old);
  const double clipped = std::clamp(ratio, 1.0 - clip.eps_low, 1.0 + clip.eps_high);
  const double unclipped_term = ratio * advantage;
  const double clipped_term = clipped * advantage;
  // min picks the clipped term only when strictly smaller; that term is
  // constant in theta whenever it differs from the unclipped one.
  if (clipped_term < unclipped_term) return 0.0;
  return -advantage * ratio;
}

std::vector<double> loss_gradient(std::span<const TrajectoryStep> steps,
                                  std::span<const double> advantages,
                                  const ClipConfig& clip,
                                  const EntropyControllerState& st,
                                  std::span<const StepJacobian> jacobians) {
  if (steps.empty() || steps.size() != advantages.size() ||
      steps.size() != jacobians.size()) {
    throw std::invalid_argument("loss_gradient: dimension mismatch");
  }
  const std::size_t dim = jacobians.front().d_logprob.size();
  for (const auto& j : jacobians) {
    if (j.d_logprob.size() != dim || j.d_entropy.size() != dim) {
      throw std::invalid_argument("loss_gradient: jacobian dimension mismatch");
    }
  }

  std::vector<double> grad(dim, 0.0);
  const double inv_n = 1.0 / static_cast<double>(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double w_logp = surrogate_logprob_weight(steps[i], advantages[i], clip) * inv_n;
    const double w_ent = -entropy_coefficient(steps[i].mode_flag, steps[i].entropy, st) * inv_n;
    const auto& jac = jacobians[i];
    if (w_logp != 0.0) {
      for (std::size_t k = 0; k < dim; ++k) grad[k] += w_logp * jac.d_logprob[k];
    }
    if (w_ent != 0.0) {
      for (std::size_t k = 0; k < dim; ++k) grad[k] += w_ent * jac.d_entropy[k];
    }
  }
  return grad;
}

}  // namespace autothink
