#pragma once

#include <filesystem>
#include <optional>

#include "autothink/trainer.hpp"

namespace autothink {

// TrainConfig plus run plumbing read from the same JSON file.
struct RunConfig {
  TrainConfig train;
  std::optional<std::filesystem::path> log_path;
};

// Every key is optional and falls back to the TrainConfig default. Unknown
// keys and mistyped values throw std::invalid_argument; the result is
// validated before returning.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const TrainConfig& cfg);

}  // namespace autothink
