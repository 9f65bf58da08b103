#pragma once

#include <optional>

#include "json.hpp"

namespace autothink {

// One line of the training log. Per-mode statistics are absent (null in the
// log) when the batch had no rollout of that mode.
struct TrainingSnapshot {
  long step = 0;
  double mean_reward = 0.0;
  double accuracy = 0.0;
  double thinking_rate = 0.0;
  std::optional<double> mean_len_think;
  std::optional<double> mean_len_nothink;
  std::optional<double> mean_entropy_think;
  std::optional<double> mean_entropy_nothink;
  double beta_l = 0.0;
  double loss = 0.0;

  friend bool operator==(const TrainingSnapshot&, const TrainingSnapshot&) = default;
};

nlohmann::json to_json(const TrainingSnapshot& s);
// Throws std::invalid_argument when a field is missing or mistyped.
TrainingSnapshot snapshot_from_json(const nlohmann::json& j);

}  // namespace autothink
