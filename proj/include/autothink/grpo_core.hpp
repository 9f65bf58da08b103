#pragma once

// Group-relative advantages, the clipped surrogate with decoupled per-mode
// entropy bonuses, and the adaptive long-mode entropy coefficient.

#include <optional>
#include <span>
#include <vector>

namespace autothink {

struct TrajectoryStep {
  double logprob_new = 0.0;
  double logprob_old = 0.0;
  double entropy = 0.0;  // full categorical entropy at this step
  int mode_flag = 0;     // 1 = short (no-think), 0 = long (think)
};

struct EntropyControllerState {
  double target_short = 0.1;  // H_s
  double target_long = 0.2;   // H_l
  double beta_short = 0.1;    // fixed
  double beta_long = 0.1;     // adaptive
  double step_size = 0.01;    // eta_beta
  double beta_max = 1.0;

  bool valid() const;
};

struct ClipConfig {
  double eps_low = 0.2;
  double eps_high = 0.28;

  bool valid() const { return eps_low > 0.0 && eps_low < 1.0 && eps_high > 0.0; }
};

struct LossReport {
  double loss = 0.0;
  std::vector<double> per_step_beta;
  std::optional<double> mean_entropy_long;
  std::optional<double> mean_entropy_short;
  double surrogate_term = 0.0;  // (1/N) sum of -min(...)
  double entropy_term = 0.0;    // (1/N) sum of -beta_i H_i
};

inline constexpr double kAdvantageEpsilon = 1e-6;

// (r - mean) / (population std + 1e-6); all zeros when the std is zero.
// Throws std::invalid_argument for fewer than two rewards.
std::vector<double> group_advantage(std::span<const double> rewards);

double entropy_coefficient(int mode_flag, double entropy,
                           const EntropyControllerState& st);

// Throws std::invalid_argument on length mismatch, empty input or
// non-finite values.
LossReport compute_policy_loss(std::span<const TrajectoryStep> steps,
                               std::span<const double> advantages,
                               const ClipConfig& clip,
                               const EntropyControllerState& st);

EntropyControllerState update_adaptive_coeff(std::span<const double> long_step_entropies,
                                             const EntropyControllerState& st);

// Gated coefficient for the uniform (non-decoupled) entropy bonus.
double fixed_entropy_bonus(double mean_entropy, double beta, double target);

// Per-step derivatives of logprob_new and of the entropy with respect to the
// flat parameter vector. Both rows have the same length P.
struct StepJacobian {
  std::span<const double> d_logprob;
  std::span<const double> d_entropy;
};

// Scale applied to d_logprob for one step: d loss / d logprob_new(step).
// Zero when the clipped branch is selected; ties go to the unclipped branch.
double surrogate_logprob_weight(const TrajectoryStep& step, double advantage,
                                const ClipConfig& clip);

// Exact gradient of compute_policy_loss under the gradient contract:
// advantages, logprob_old and beta_i are constants.
// Throws std::invalid_argument on dimension mismatch.
std::vector<double> loss_gradient(std::span<const TrajectoryStep> steps,
                                  std::span<const double> advantages,
                                  const ClipConfig& clip,
                                  const EntropyControllerState& st,
                                  std::span<const StepJacobian> jacobians);

}  // namespace autothink
