#pragma once

#include <optional>
#include <string_view>

namespace autothink {

enum class Difficulty { kEasy = 0, kMedium = 1, kHard = 2 };

inline constexpr int kNumDifficulties = 3;

inline std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy: return "easy";
    case Difficulty::kMedium: return "medium";
    case Difficulty::kHard: return "hard";
  }
  return "unknown";
}

inline std::optional<Difficulty> difficulty_from_string(std::string_view s) {
  if (s == "easy") return Difficulty::kEasy;
  if (s == "medium") return Difficulty::kMedium;
  if (s == "hard") return Difficulty::kHard;
  return std::nullopt;
}

}  // namespace autothink
