#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace autothink {

// Bad input data (as opposed to a bad invocation). `line` is 1-based, 0 when
// the problem is not tied to a line.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Calls `fn(json, line_no)` for each non-blank line. Parse errors and
// exceptions thrown by `fn` surface as DataError carrying the line number.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

}  // namespace autothink
