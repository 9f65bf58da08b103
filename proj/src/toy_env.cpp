#include "autothink/toy_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "autothink/rng.hpp"

namespace autothink {
namespace {

constexpr std::array<const char*, 12> kToolNames = {
    "get_weather",   "search_flights", "book_hotel",     "send_email",
    "get_stock",     "translate_text", "set_alarm",      "find_restaurant",
    "convert_units", "create_event",   "lookup_contact", "play_music",
};

void check_mix(const DifficultyMix& mix) {
  double sum = 0.0;
  for (double p : mix) {
    if (!(p >= 0.0)) throw std::invalid_argument("difficulty mix must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("difficulty mix must sum to 1");
  }
}

}  // namespace

std::vector<std::size_t> Environment::medium_permutation() const {
  std::vector<std::size_t> perm(num_symbols);
  std::iota(perm.begin(), perm.end(), 0);
  CounterRng rng({static_cast<std::uint64_t>(StreamTag::kEnvironment), env_seed, num_symbols});
  for (std::size_t i = num_symbols; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
  }
  return perm;
}

std::vector<std::string> Environment::catalog() const {
  std::vector<std::string> names;
  names.reserve(num_symbols);
  for (std::size_t i = 0; i < num_symbols; ++i) {
    std::string name = kToolNames[i % kToolNames.size()];
    if (i >= kToolNames.size()) name += "_" + std::to_string(i / kToolNames.size());
    names.push_back(std::move(name));
  }
  return names;
}

std::array<std::size_t, kNumDifficulties> difficulty_counts(std::size_t count,
                                                            const DifficultyMix& mix) {
  check_mix(mix);
  std::array<std::size_t, kNumDifficulties> counts{};
  std::array<double, kNumDifficulties> frac{};
  std::size_t assigned = 0;
  for (int d = 0; d < kNumDifficulties; ++d) {
    const double exact = mix[d] * static_cast<double>(count);
    // Nudge so that 0.47 * 100 lands on 47 instead of 46.999...
    const double fl = std::floor(exact + 1e-9);
    counts[d] = static_cast<std::size_t>(fl);
    frac[d] = exact - fl;
    assigned += counts[d];
  }
  while (assigned < count) {
    int best = 0;
    for (int d = 1; d < kNumDifficulties; ++d) {
      if (frac[d] > frac[best]) best = d;
    }
    ++counts[best];
    frac[best] = -1.0;
    ++assigned;
  }
  return counts;
}

ToolCall make_call(const std::vector<std::string>& catalog, std::size_t symbol) {
  return ToolCall{catalog.at(symbol), Json{{"arg", symbol}}};
}

std::vector<SyntheticTask> generate_tasks(std::uint64_t seed, std::size_t count,
                                          const DifficultyMix& mix, std::size_t num_symbols,
                                          std::uint64_t env_seed) {
  if (num_symbols < 2) throw std::invalid_argument("generate_tasks: K < 2");
  const auto counts = difficulty_counts(count, mix);
  const Environment env{num_symbols, env_seed};
  const auto perm = env.medium_permutation();
  const auto catalog = env.catalog();

  std::vector<Difficulty> tiers;
  tiers.reserve(count);
  for (int d = 0; d < kNumDifficulties; ++d) {
    tiers.insert(tiers.end(), counts[d], static_cast<Difficulty>(d));
  }
  CounterRng rng({static_cast<std::uint64_t>(StreamTag::kTasks), seed});
  for (std::size_t i = tiers.size(); i > 1; --i) {
    std::swap(tiers[i - 1], tiers[rng.uniform_index(i)]);
  }

  std::vector<SyntheticTask> tasks(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto& t = tasks[i];
    t.task_id = i;
    t.difficulty = tiers[i];
    t.observable = rng.uniform_index(num_symbols);
    switch (t.difficulty) {
      case Difficulty::kEasy:
        t.answer = t.observable;
        t.latent = t.answer;
        break;
      case Difficulty::kMedium:
        t.answer = perm[t.observable];
        t.latent = t.answer;
        break;
      case Difficulty::kHard:
        t.latent = rng.uniform_index(num_symbols);
        t.answer = t.latent;
        break;
    }
    t.catalog = catalog;
    t.ground_truth = make_call(catalog, t.answer);
  }
  return tasks;
}

ParsedResponse rollout_response(const SyntheticTask& task, ReasoningMode mode,
                                std::size_t chosen_answer) {
  ParsedResponse r;
  r.mode = mode;
  r.payload = ToolCalls{make_call(task.catalog, chosen_answer)};
  if (mode == ReasoningMode::kThink) {
    ParsedResponse short_form = r;
    short_form.mode = ReasoningMode::kNoThink;
    const std::size_t words = 5 * whitespace_token_count(render_response(short_form));
    std::string reasoning = "hint=" + std::to_string(task.latent);
    for (std::size_t w = 1; w < words; ++w) reasoning += " step_" + std::to_string(w);
    r.reasoning_text = std::move(reasoning);
  }
  r.token_length = whitespace_token_count(render_response(r));
  return r;
}

std::string rollout_text(const SyntheticTask& task, ReasoningMode mode,
                         std::size_t chosen_answer) {
  return render_response(rollout_response(task, mode, chosen_answer));
}

GroundTruth task_ground_truth(const SyntheticTask& task) {
  return GroundTruth{ToolCalls{task.ground_truth}};
}

double expected_answer_reward(ReasoningMode mode, double accuracy) {
  if (mode == ReasoningMode::kNoThink) {
    return accuracy * kRewardCorrectNoThink + (1.0 - accuracy) * kRewardWrongNoThink;
  }
  return accuracy * kRewardCorrectThink + (1.0 - accuracy) * kRewardWrongThink;
}

std::vector<OracleRow> env_oracle_table(std::size_t num_symbols) {
  if (num_symbols < 2) throw std::invalid_argument("env_oracle_table: K < 2");
  const double chance = 1.0 / static_cast<double>(num_symbols);
  std::vector<OracleRow> rows;
  for (int d = 0; d < kNumDifficulties; ++d) {
    const auto diff = static_cast<Difficulty>(d);
    for (ReasoningMode mode : {ReasoningMode::kNoThink, ReasoningMode::kThink}) {
      // Only hard tasks without the hint are information-limited.
      const double best =
          (diff == Difficulty::kHard && mode == ReasoningMode::kNoThink) ? chance : 1.0;
      rows.push_back(OracleRow{diff, mode, best, expected_answer_reward(mode, best), chance,
                               expected_answer_reward(mode, chance)});
    }
  }
  return rows;
}

ReasoningMode oracle_mode(Difficulty d, std::size_t num_symbols) {
  ReasoningMode best_mode = ReasoningMode::kNoThink;
  double best = -1e300;
  for (const auto& row : env_oracle_table(num_symbols)) {
    if (row.difficulty == d && row.best_expected_reward > best) {
      best = row.best_expected_reward;
      best_mode = row.mode;
    }
  }
  return best_mode;
}

}  // namespace autothink
