#include "autothink/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace autothink {
namespace {

std::vector<double> probabilities(const StepStats& stats) {
  std::vector<double> p(stats.logprobs.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(stats.logprobs[i]);
  return p;
}

void evaluate_rollout(const PolicyParams& params, const SyntheticTask& task,
                      const Rollout& r, std::size_t row, BatchEvaluation& out) {
  const std::size_t dim = params.size();
  const auto contexts = rollout_contexts(task, r.mode, params.num_symbols());
  const std::array<std::size_t, 2> actions = {static_cast<std::size_t>(mode_flag(r.mode)),
                                              r.answer};
  for (std::size_t j = 0; j < 2; ++j) {
    const auto stats = policy_step_stats(params, contexts[j]);
    auto& step = out.steps[row + j];
    step.logprob_new = stats.logprobs[actions[j]];
    step.logprob_old = r.steps[j].logprob_old;
    step.entropy = stats.entropy;
    step.mode_flag = mode_flag(r.mode);
    policy_step_jacobians(params, contexts[j], stats, actions[j],
                          std::span<double>(out.d_logprob).subspan((row + j) * dim, dim),
                          std::span<double>(out.d_entropy).subspan((row + j) * dim, dim));
  }
}

BatchEvaluation make_evaluation(std::size_t rollouts, std::size_t dim) {
  BatchEvaluation e;
  e.steps.resize(2 * rollouts);
  e.d_logprob.assign(2 * rollouts * dim, 0.0);
  e.d_entropy.assign(2 * rollouts * dim, 0.0);
  return e;
}

std::vector<std::size_t> pick_prompts(std::size_t pool, std::size_t batch, std::uint64_t seed,
                                      std::uint64_t step) {
  CounterRng rng({static_cast<std::uint64_t>(StreamTag::kPromptPick), seed, step});
  std::vector<std::size_t> picked(batch);
  if (batch > pool) {
    for (auto& p : picked) p = rng.uniform_index(pool);
    return picked;
  }
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < batch; ++i) {
    std::swap(idx[i], idx[i + rng.uniform_index(pool - i)]);
    picked[i] = idx[i];
  }
  return picked;
}

template <typename T>
std::optional<double> mean_or_empty(double sum, T n) {
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

void TrainConfig::validate() const {
  if (group_size < 2) throw std::invalid_argument("G must be >= 2");
  if (batch_prompts < 1) throw std::invalid_argument("batch_prompts must be >= 1");
  if (num_symbols < 2) throw std::invalid_argument("num_symbols must be >= 2");
  if (task_pool_size < 1) throw std::invalid_argument("task_pool_size must be >= 1");
  if (updates_per_batch < 1) throw std::invalid_argument("updates_per_batch must be >= 1");
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
    throw std::invalid_argument("learning_rate must be finite and non-negative");
  }
  if (!clip.valid()) throw std::invalid_argument("clip: need 0 < eps_low < 1, eps_high > 0");
  if (!entropy.valid()) throw std::invalid_argument("entropy controller state invalid");
  if (fixed_beta < 0.0) throw std::invalid_argument("fixed_beta must be >= 0");
  double sum = 0.0;
  for (double p : difficulty_mix) {
    if (!(p >= 0.0)) throw std::invalid_argument("difficulty_mix entries must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("difficulty_mix must sum to 1");
  if (reward.penalty_magnitude < 0.0) throw std::invalid_argument("penalty_magnitude < 0");
}

std::array<StepContext, 2> rollout_contexts(const SyntheticTask& task, ReasoningMode mode,
                                            std::size_t num_symbols) {
  const StepContext answer = mode == ReasoningMode::kThink
                                 ? think_context(num_symbols, task.observable, task.latent)
                                 : no_think_context(num_symbols, task.difficulty, task.observable);
  return {mode_context(task.difficulty), answer};
}

Rollout sample_rollout(const PolicyParams& params, const SyntheticTask& task, CounterRng& rng,
                       const RewardConfig& reward_cfg) {
  Rollout r;
  r.task_id = task.task_id;

  const auto mode_stats = policy_step_stats(params, mode_context(task.difficulty));
  const std::size_t mode_action = rng.categorical(probabilities(mode_stats));
  r.mode = mode_action == kThinkAction ? ReasoningMode::kThink : ReasoningMode::kNoThink;
  const int flag = mode_flag(r.mode);

  // Think reveals the latent hint to the answer head; no-think does not.
  const auto contexts = rollout_contexts(task, r.mode, params.num_symbols());
  const auto answer_stats = policy_step_stats(params, contexts[1]);
  r.answer = rng.categorical(probabilities(answer_stats));

  r.steps = {
      TrajectoryStep{mode_stats.logprobs[mode_action], mode_stats.logprobs[mode_action],
                     mode_stats.entropy, flag},
      TrajectoryStep{answer_stats.logprobs[r.answer], answer_stats.logprobs[r.answer],
                     answer_stats.entropy, flag},
  };

  const auto response = rollout_response(task, r.mode, r.answer);
  r.emitted_text = render_response(response);
  r.token_length = response.token_length;
  r.reward = composite_reward(r.emitted_text, task_ground_truth(task), reward_cfg);
  return r;
}

std::vector<Rollout> sample_batch_serial(const PolicyParams& params,
                                         std::span<const SyntheticTask* const> prompts,
                                         std::size_t group_size, std::uint64_t seed,
                                         std::uint64_t step, const RewardConfig& reward_cfg) {
  std::vector<Rollout> out(prompts.size() * group_size);
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    for (std::size_t g = 0; g < group_size; ++g) {
      CounterRng rng({static_cast<std::uint64_t>(StreamTag::kRollout), seed, step, p, g});
      out[p * group_size + g] = sample_rollout(params, *prompts[p], rng, reward_cfg);
    }
  }
  return out;
}

std::vector<Rollout> sample_batch_parallel(const PolicyParams& params,
                                           std::span<const SyntheticTask* const> prompts,
                                           std::size_t group_size, std::uint64_t seed,
                                           std::uint64_t step, const RewardConfig& reward_cfg) {
  std::vector<Rollout> out(prompts.size() * group_size);
  const auto total = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    const auto p = static_cast<std::size_t>(i) / group_size;
    const auto g = static_cast<std::size_t>(i) % group_size;
    CounterRng rng({static_cast<std::uint64_t>(StreamTag::kRollout), seed, step, p, g});
    out[i] = sample_rollout(params, *prompts[p], rng, reward_cfg);
  }
  return out;
}

BatchEvaluation evaluate_batch_serial(const PolicyParams& params,
                                      std::span<const SyntheticTask* const> prompts,
                                      std::size_t group_size, std::span<const Rollout> rollouts) {
  auto out = make_evaluation(rollouts.size(), params.size());
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    evaluate_rollout(params, *prompts[i / group_size], rollouts[i], 2 * i, out);
  }
  return out;
}

BatchEvaluation evaluate_batch_parallel(const PolicyParams& params,
                                        std::span<const SyntheticTask* const> prompts,
                                        std::size_t group_size, std::span<const Rollout> rollouts) {
  auto out = make_evaluation(rollouts.size(), params.size());
  const auto total = static_cast<std::ptrdiff_t>(rollouts.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    const auto k = static_cast<std::size_t>(i);
    evaluate_rollout(params, *prompts[k / group_size], rollouts[k], 2 * k, out);
  }
  return out;
}

double thinking_rate(std::span<const Rollout> rollouts) {
  if (rollouts.empty()) throw std::invalid_argument("thinking_rate: no rollouts");
  std::size_t think = 0;
  for (const auto& r : rollouts) think += r.mode == ReasoningMode::kThink ? 1 : 0;
  return static_cast<double>(think) / static_cast<double>(rollouts.size());
}

TrainingSnapshot summarize_batch(long step, std::span<const Rollout> rollouts, double beta_l,
                                 double loss) {
  TrainingSnapshot s;
  s.step = step;
  s.beta_l = beta_l;
  s.loss = loss;
  if (rollouts.empty()) return s;

  double reward_sum = 0.0;
  std::size_t correct = 0;
  double len_sum[2] = {0.0, 0.0};
  double ent_sum[2] = {0.0, 0.0};
  std::size_t n_mode[2] = {0, 0};
  std::size_t n_steps[2] = {0, 0};
  for (const auto& r : rollouts) {
    reward_sum += r.reward.total;
    if (r.reward.answer && *r.reward.answer > 0.0) ++correct;
    const int f = mode_flag(r.mode);
    len_sum[f] += static_cast<double>(r.token_length);
    ++n_mode[f];
    for (const auto& st : r.steps) {
      ent_sum[f] += st.entropy;
      ++n_steps[f];
    }
  }
  const double n = static_cast<double>(rollouts.size());
  s.mean_reward = reward_sum / n;
  s.accuracy = static_cast<double>(correct) / n;
  s.thinking_rate = thinking_rate(rollouts);
  s.mean_len_think = mean_or_empty(len_sum[0], n_mode[0]);
  s.mean_len_nothink = mean_or_empty(len_sum[1], n_mode[1]);
  s.mean_entropy_think = mean_or_empty(ent_sum[0], n_steps[0]);
  s.mean_entropy_nothink = mean_or_empty(ent_sum[1], n_steps[1]);
  return s;
}

TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  TrainResult result;
  result.tasks = generate_tasks(cfg.seed, cfg.task_pool_size, cfg.difficulty_mix,
                                cfg.num_symbols, cfg.env_seed);
  result.params = initial_policy(cfg.num_symbols, cfg.init_answer_margin);
  result.controller = cfg.entropy;
  auto& params = result.params;
  auto& ctrl = result.controller;

  const std::size_t g = cfg.group_size;
  std::vector<const SyntheticTask*> prompts(cfg.batch_prompts);
  std::vector<double> group_rewards(g);
  std::vector<double> step_adv;
  std::vector<StepJacobian> jac;

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const auto picked = pick_prompts(result.tasks.size(), cfg.batch_prompts, cfg.seed, step);
    for (std::size_t p = 0; p < picked.size(); ++p) prompts[p] = &result.tasks[picked[p]];

    // Rollouts use the parameters as they stand at step start (the old policy).
    const auto rollouts =
        cfg.parallel ? sample_batch_parallel(params, prompts, g, cfg.seed, step, cfg.reward)
                     : sample_batch_serial(params, prompts, g, cfg.seed, step, cfg.reward);
    if (hooks.on_batch) hooks.on_batch(step, rollouts);

    step_adv.assign(2 * rollouts.size(), 0.0);
    for (std::size_t p = 0; p < prompts.size(); ++p) {
      for (std::size_t j = 0; j < g; ++j) group_rewards[j] = rollouts[p * g + j].reward.total;
      const auto adv = group_advantage(group_rewards);
      for (std::size_t j = 0; j < g; ++j) {
        step_adv[2 * (p * g + j)] = adv[j];
        step_adv[2 * (p * g + j) + 1] = adv[j];
      }
    }

    EntropyControllerState loss_state = ctrl;
    double applied_beta = ctrl.beta_long;
    if (cfg.regime == EntropyRegime::kFixedGate) {
      double sum = 0.0;
      for (const auto& r : rollouts) {
        for (const auto& st : r.steps) sum += st.entropy;
      }
      const double mean_entropy = sum / static_cast<double>(2 * rollouts.size());
      applied_beta = fixed_entropy_bonus(mean_entropy, cfg.fixed_beta, cfg.fixed_target);
      loss_state.beta_short = applied_beta;
      loss_state.beta_long = applied_beta;
      loss_state.beta_max = std::max(loss_state.beta_max, applied_beta);
      loss_state.target_short = std::numeric_limits<double>::infinity();
      loss_state.target_long = std::numeric_limits<double>::infinity();
    }

    double first_loss = 0.0;
    for (std::size_t pass = 0; pass < cfg.updates_per_batch; ++pass) {
      const auto eval = cfg.parallel ? evaluate_batch_parallel(params, prompts, g, rollouts)
                                     : evaluate_batch_serial(params, prompts, g, rollouts);
      const auto report = compute_policy_loss(eval.steps, step_adv, cfg.clip, loss_state);
      if (!std::isfinite(report.loss)) {
        throw std::runtime_error("non-finite loss at step " + std::to_string(step + 1));
      }
      if (pass == 0) first_loss = report.loss;

      const std::size_t dim = params.size();
      jac.resize(eval.steps.size());
      for (std::size_t i = 0; i < eval.steps.size(); ++i) {
        jac[i] = StepJacobian{std::span<const double>(eval.d_logprob).subspan(i * dim, dim),
                              std::span<const double>(eval.d_entropy).subspan(i * dim, dim)};
      }
      const auto grad = loss_gradient(eval.steps, step_adv, cfg.clip, loss_state, jac);
      auto theta = params.flat_view();
      for (std::size_t k = 0; k < dim; ++k) theta[k] -= cfg.learning_rate * grad[k];
      if (!params.all_finite()) {
        throw std::runtime_error("non-finite parameters at step " + std::to_string(step + 1));
      }
    }

    if (cfg.regime == EntropyRegime::kDecoupled) {
      std::vector<double> long_entropies;
      for (const auto& r : rollouts) {
        for (const auto& st : r.steps) {
          if (st.mode_flag == 0) long_entropies.push_back(st.entropy);
        }
      }
      ctrl = update_adaptive_coeff(long_entropies, ctrl);
      applied_beta = ctrl.beta_long;
    }

    auto snap = summarize_batch(static_cast<long>(step + 1), rollouts, applied_beta, first_loss);
    if (hooks.on_snapshot) hooks.on_snapshot(snap);
    result.snapshots.push_back(std::move(snap));
  }
  return result;
}

EvalResult forced_mode_eval(const PolicyParams& params, std::span<const SyntheticTask> tasks,
                            std::optional<ReasoningMode> mode) {
  EvalResult out;
  out.count = tasks.size();
  if (tasks.empty()) return out;
  std::size_t correct = 0;
  std::size_t think = 0;
  double len = 0.0;
  for (const auto& task : tasks) {
    ReasoningMode chosen;
    if (mode) {
      chosen = *mode;
    } else {
      const auto stats = policy_step_stats(params, mode_context(task.difficulty));
      chosen = argmax(stats.logits) == kThinkAction ? ReasoningMode::kThink
                                                    : ReasoningMode::kNoThink;
    }
    const auto contexts = rollout_contexts(task, chosen, params.num_symbols());
    const auto stats = policy_step_stats(params, contexts[1]);
    const std::size_t answer = argmax(stats.logits);
    const auto response = rollout_response(task, chosen, answer);
    const auto reward =
        composite_reward(render_response(response), task_ground_truth(task), RewardConfig{});
    if (reward.answer && *reward.answer > 0.0) ++correct;
    if (chosen == ReasoningMode::kThink) ++think;
    len += static_cast<double>(response.token_length);
  }
  const double n = static_cast<double>(tasks.size());
  out.accuracy = static_cast<double>(correct) / n;
  out.thinking_rate = static_cast<double>(think) / n;
  out.mean_token_length = len / n;
  return out;
}

}  // namespace autothink
