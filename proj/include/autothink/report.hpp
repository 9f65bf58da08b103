#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "autothink/snapshot.hpp"

namespace autothink {

// Accuracy per computation unit, reported x1e3: accuracy / (params * tokens).
// `params` in billions, `tokens` the mean completion length.
struct AcuInputs {
  double accuracy = 0.0;
  double params = 0.0;
  double tokens = 0.0;
};

// Throws std::invalid_argument for params <= 0, tokens <= 0 or accuracy
// outside [0, 1].
double acu(const AcuInputs& in);

// Streams snapshots as JSON lines, flushing after each one.
class LogWriter {
 public:
  // Truncates unless `append` is set. Throws std::runtime_error on open failure.
  explicit LogWriter(const std::filesystem::path& path, bool append = false);
  void write(const TrainingSnapshot& s);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void emit_log(const std::vector<TrainingSnapshot>& snapshots, const std::filesystem::path& path);

// Throws DataError on the first malformed line.
std::vector<TrainingSnapshot> read_log(const std::filesystem::path& path);

// Writes one SVG per metric family and metrics.csv into `out_dir` (created if
// missing). Returns the written file names.
std::vector<std::string> render_plots(const std::filesystem::path& log_path,
                                      const std::filesystem::path& out_dir);

// Same, from snapshots already in memory.
std::vector<std::string> render_plots(const std::vector<TrainingSnapshot>& snapshots,
                                      const std::filesystem::path& out_dir);

}  // namespace autothink
