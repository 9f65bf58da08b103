#include "doctest.h"

#include <cmath>

#include "autothink/trainer.hpp"

using namespace autothink;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.steps = 60;
  c.batch_prompts = 8;
  c.task_pool_size = 64;
  c.learning_rate = 0.2;
  return c;
}

}  // namespace

TEST_CASE("serial and parallel batch kernels agree bit for bit") {
  const auto tasks = generate_tasks(3, 40, kDefaultMix, 6);
  std::vector<const SyntheticTask*> prompts;
  for (const auto& t : tasks) prompts.push_back(&t);
  auto params = initial_policy(6, 1.0);
  params.weight(Head::kMode, 0, 2) = 0.7;
  const auto a = sample_batch_serial(params, prompts, 8, 5, 17, {});
  const auto b = sample_batch_parallel(params, prompts, 8, 5, 17, {});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].emitted_text == b[i].emitted_text);
    CHECK(a[i].reward == b[i].reward);
    CHECK(a[i].steps[1].logprob_old == b[i].steps[1].logprob_old);
  }
  const auto ea = evaluate_batch_serial(params, prompts, 8, a);
  const auto eb = evaluate_batch_parallel(params, prompts, 8, a);
  CHECK(ea.d_logprob == eb.d_logprob);
  CHECK(ea.d_entropy == eb.d_entropy);
}

TEST_CASE("first pass after sampling has ratio exactly one") {
  const auto tasks = generate_tasks(3, 10, kDefaultMix, 4);
  std::vector<const SyntheticTask*> prompts;
  for (const auto& t : tasks) prompts.push_back(&t);
  const auto params = initial_policy(4, 2.0);
  const auto rollouts = sample_batch_parallel(params, prompts, 8, 1, 0, {});
  const auto eval = evaluate_batch_parallel(params, prompts, 8, rollouts);
  for (const auto& s : eval.steps) CHECK(s.logprob_new - s.logprob_old == 0.0);
}

TEST_CASE("train is a pure function of the config") {
  auto cfg = small_config();
  const auto a = train(cfg);
  cfg.parallel = false;
  const auto b = train(cfg);
  CHECK(a.snapshots == b.snapshots);
  CHECK(a.params == b.params);
  cfg.seed = 2;
  CHECK_FALSE(train(cfg).snapshots == a.snapshots);
}

TEST_CASE("snapshots are recomputable from the raw rollouts") {
  auto cfg = small_config();
  std::vector<std::vector<Rollout>> batches;
  TrainHooks hooks;
  hooks.on_batch = [&](std::size_t, std::span<const Rollout> r) {
    batches.emplace_back(r.begin(), r.end());
  };
  const auto result = train(cfg, hooks);
  REQUIRE(batches.size() == result.snapshots.size());
  for (std::size_t i = 0; i < batches.size(); ++i) {
    const auto& snap = result.snapshots[i];
    CHECK(snap.step == static_cast<long>(i + 1));
    double ent[2] = {0, 0}, reward = 0;
    int n[2] = {0, 0};
    for (const auto& r : batches[i]) {
      reward += r.reward.total;
      for (const auto& s : r.steps) {
        ent[s.mode_flag] += s.entropy;
        ++n[s.mode_flag];
      }
    }
    CHECK(std::abs(snap.mean_reward - reward / batches[i].size()) <= 1e-12);
    if (n[0]) CHECK(std::abs(*snap.mean_entropy_think - ent[0] / n[0]) <= 1e-12);
    if (n[1]) CHECK(std::abs(*snap.mean_entropy_nothink - ent[1] / n[1]) <= 1e-12);
    CHECK(snap.mean_entropy_think.has_value() == (n[0] > 0));
    CHECK(snap.thinking_rate >= 0.0);
    CHECK(snap.thinking_rate <= 1.0);
    CHECK(snap.beta_l >= 0.0);
    CHECK(snap.beta_l <= cfg.entropy.beta_max);
  }
}

TEST_CASE("fixed gate regime keeps its coefficient") {
  auto cfg = small_config();
  cfg.regime = EntropyRegime::kFixedGate;
  cfg.fixed_beta = 0.3;
  cfg.fixed_target = 10.0;
  const auto r = train(cfg);
  for (const auto& s : r.snapshots) CHECK(s.beta_l == 0.3);
  CHECK(r.controller.beta_long == cfg.entropy.beta_long);
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.group_size = 1;
  CHECK_THROWS(c.validate());
  c = TrainConfig{};
  c.difficulty_mix = {0.5, 0.2, 0.2};
  CHECK_THROWS(c.validate());
  c = TrainConfig{};
  c.learning_rate = NAN;
  CHECK_THROWS(c.validate());
}

TEST_CASE("forced_mode_eval reports lengths and modes") {
  const auto tasks = generate_tasks(1, 50, kDefaultMix, 4);
  const auto p = initial_policy(4, 3.0);
  const auto think = forced_mode_eval(p, tasks, ReasoningMode::kThink);
  const auto fast = forced_mode_eval(p, tasks, ReasoningMode::kNoThink);
  CHECK(think.thinking_rate == 1.0);
  CHECK(fast.thinking_rate == 0.0);
  CHECK(think.mean_token_length >= 5 * fast.mean_token_length);
  CHECK(forced_mode_eval(p, {}, std::nullopt).count == 0);
}
