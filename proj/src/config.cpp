#include "autothink/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace autothink {
namespace {

using Json = nlohmann::json;

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw std::invalid_argument("unknown key " + where + "." + key);
  }
}

template <typename T>
void read(const Json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw std::invalid_argument(std::string(key) + " must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0)) {
      throw std::invalid_argument(std::string(key) + " must be a non-negative integer");
    }
  } else {
    if (!v.is_number()) throw std::invalid_argument(std::string(key) + " must be a number");
  }
  dst = v.get<T>();
}

}  // namespace

RunConfig run_config_from_json(const Json& j) {
  reject_unknown(j,
                 {"G", "batch_prompts", "steps", "learning_rate", "seed", "clip", "entropy",
                  "regime", "fixed_beta", "fixed_target", "reward", "difficulty_mix",
                  "num_symbols", "task_pool_size", "env_seed", "init_answer_margin",
                  "updates_per_batch", "parallel", "log_path"},
                 "config");
  RunConfig rc;
  auto& c = rc.train;
  read(j, "G", c.group_size);
  read(j, "batch_prompts", c.batch_prompts);
  read(j, "steps", c.steps);
  read(j, "learning_rate", c.learning_rate);
  read(j, "seed", c.seed);
  read(j, "fixed_beta", c.fixed_beta);
  read(j, "fixed_target", c.fixed_target);
  read(j, "num_symbols", c.num_symbols);
  read(j, "task_pool_size", c.task_pool_size);
  read(j, "env_seed", c.env_seed);
  read(j, "init_answer_margin", c.init_answer_margin);
  read(j, "updates_per_batch", c.updates_per_batch);
  read(j, "parallel", c.parallel);

  if (j.contains("clip")) {
    const auto& k = j.at("clip");
    reject_unknown(k, {"eps_low", "eps_high"}, "clip");
    read(k, "eps_low", c.clip.eps_low);
    read(k, "eps_high", c.clip.eps_high);
  }
  if (j.contains("entropy")) {
    const auto& e = j.at("entropy");
    reject_unknown(e,
                   {"target_short", "target_long", "beta_short", "beta_long", "step_size",
                    "beta_max"},
                   "entropy");
    read(e, "target_short", c.entropy.target_short);
    read(e, "target_long", c.entropy.target_long);
    read(e, "beta_short", c.entropy.beta_short);
    read(e, "beta_long", c.entropy.beta_long);
    read(e, "step_size", c.entropy.step_size);
    read(e, "beta_max", c.entropy.beta_max);
  }
  if (j.contains("regime")) {
    const auto& r = j.at("regime");
    if (r == "decoupled") {
      c.regime = EntropyRegime::kDecoupled;
    } else if (r == "fixed_gate") {
      c.regime = EntropyRegime::kFixedGate;
    } else {
      throw std::invalid_argument("regime must be \"decoupled\" or \"fixed_gate\"");
    }
  }
  if (j.contains("reward")) {
    const auto& r = j.at("reward");
    reject_unknown(r,
                   {"length_penalty_enabled", "target_length", "penalty_magnitude",
                    "invalid_format_reward"},
                   "reward");
    read(r, "length_penalty_enabled", c.reward.length_penalty_enabled);
    read(r, "target_length", c.reward.target_length);
    read(r, "penalty_magnitude", c.reward.penalty_magnitude);
    read(r, "invalid_format_reward", c.reward.invalid_format_reward);
  }
  if (j.contains("difficulty_mix")) {
    const auto& m = j.at("difficulty_mix");
    if (!m.is_array() || m.size() != kNumDifficulties) {
      throw std::invalid_argument("difficulty_mix must be [easy, medium, hard]");
    }
    for (int d = 0; d < kNumDifficulties; ++d) {
      if (!m[d].is_number()) throw std::invalid_argument("difficulty_mix entries must be numbers");
      c.difficulty_mix[d] = m[d].get<double>();
    }
  }
  if (j.contains("log_path")) {
    if (!j.at("log_path").is_string()) throw std::invalid_argument("log_path must be a string");
    rc.log_path = j.at("log_path").get<std::string>();
  }
  c.validate();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

Json to_json(const TrainConfig& c) {
  return Json{
      {"G", c.group_size},
      {"batch_prompts", c.batch_prompts},
      {"steps", c.steps},
      {"learning_rate", c.learning_rate},
      {"seed", c.seed},
      {"clip", {{"eps_low", c.clip.eps_low}, {"eps_high", c.clip.eps_high}}},
      {"entropy",
       {{"target_short", c.entropy.target_short},
        {"target_long", c.entropy.target_long},
        {"beta_short", c.entropy.beta_short},
        {"beta_long", c.entropy.beta_long},
        {"step_size", c.entropy.step_size},
        {"beta_max", c.entropy.beta_max}}},
      {"regime", c.regime == EntropyRegime::kDecoupled ? "decoupled" : "fixed_gate"},
      {"fixed_beta", c.fixed_beta},
      {"fixed_target", c.fixed_target},
      {"reward",
       {{"length_penalty_enabled", c.reward.length_penalty_enabled},
        {"target_length", c.reward.target_length},
        {"penalty_magnitude", c.reward.penalty_magnitude},
        {"invalid_format_reward", c.reward.invalid_format_reward}}},
      {"difficulty_mix", c.difficulty_mix},
      {"num_symbols", c.num_symbols},
      {"task_pool_size", c.task_pool_size},
      {"env_seed", c.env_seed},
      {"init_answer_margin", c.init_answer_margin},
      {"updates_per_batch", c.updates_per_batch},
      {"parallel", c.parallel},
  };
}

}  // namespace autothink
