#include "autothink/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "autothink/jsonl.hpp"

namespace autothink {
namespace {

using Json = nlohmann::json;

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

double req_number(const Json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing field ") + key);
  const auto& v = j.at(key);
  if (!v.is_number()) throw std::invalid_argument(std::string("field ") + key + " must be numeric");
  return v.get<double>();
}

std::optional<double> opt_number(const Json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing field ") + key);
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw std::invalid_argument(std::string("field ") + key + " must be numeric");
  return v.get<double>();
}

std::string num(double v, const char* fmt = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

struct Series {
  std::string label;
  std::string color;
  std::vector<std::optional<double>> values;
};

// Minimal line chart. Missing values break the line; isolated points get a dot.
std::string svg_chart(const std::string& title, const std::vector<long>& steps,
                      const std::vector<Series>& series) {
  constexpr double kW = 640, kH = 360, kL = 64, kR = 16, kT = 32, kB = 40;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : series) {
    for (const auto& v : s.values) {
      if (v && std::isfinite(*v)) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double x0 = steps.empty() ? 0.0 : static_cast<double>(steps.front());
  double x1 = steps.empty() ? 1.0 : static_cast<double>(steps.back());
  if (x1 <= x0) x1 = x0 + 1.0;
  auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (y - lo) / (hi - lo) * (kH - kT - kB); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n";
  o << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\""
    << kH - kB << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = lo + (hi - lo) * t / 4.0;
    o << "<text x=\"" << kL - 4 << "\" y=\"" << num(py(y), "%.2f")
      << "\" text-anchor=\"end\">" << num(y, "%.4g") << "</text>\n";
  }
  o << "<text x=\"" << kL << "\" y=\"" << kH - kB + 16 << "\">" << num(x0, "%.0f") << "</text>\n";
  o << "<text x=\"" << kW - kR << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"end\">"
    << num(x1, "%.0f") << "</text>\n";
  o << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 8
    << "\" text-anchor=\"middle\">step</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::vector<std::vector<std::pair<double, double>>> runs(1);
    for (std::size_t i = 0; i < steps.size() && i < s.values.size(); ++i) {
      const auto& v = s.values[i];
      if (v && std::isfinite(*v)) {
        runs.back().emplace_back(px(static_cast<double>(steps[i])), py(*v));
      } else if (!runs.back().empty()) {
        runs.emplace_back();
      }
    }
    for (const auto& run : runs) {
      if (run.size() == 1) {
        o << "<circle cx=\"" << num(run[0].first, "%.2f") << "\" cy=\""
          << num(run[0].second, "%.2f") << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
      } else if (run.size() > 1) {
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : run) o << num(x, "%.2f") << ',' << num(y, "%.2f") << ' ';
        o << "\"/>\n";
      }
    }
    o << "<text x=\"" << kL + 8 << "\" y=\"" << kT + 12 + 14 * k << "\" fill=\"" << s.color
      << "\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string csv_cell(const std::optional<double>& v) { return v ? num(*v, "%.17g") : ""; }

}  // namespace

Json to_json(const TrainingSnapshot& s) {
  return Json{{"step", s.step},
              {"mean_reward", s.mean_reward},
              {"accuracy", s.accuracy},
              {"thinking_rate", s.thinking_rate},
              {"mean_len_think", opt(s.mean_len_think)},
              {"mean_len_nothink", opt(s.mean_len_nothink)},
              {"mean_entropy_think", opt(s.mean_entropy_think)},
              {"mean_entropy_nothink", opt(s.mean_entropy_nothink)},
              {"beta_l", s.beta_l},
              {"loss", s.loss}};
}

TrainingSnapshot snapshot_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("snapshot must be a JSON object");
  TrainingSnapshot s;
  if (!j.contains("step") || !j.at("step").is_number_integer()) {
    throw std::invalid_argument("field step must be an integer");
  }
  s.step = j.at("step").get<long>();
  s.mean_reward = req_number(j, "mean_reward");
  s.accuracy = req_number(j, "accuracy");
  s.thinking_rate = req_number(j, "thinking_rate");
  s.mean_len_think = opt_number(j, "mean_len_think");
  s.mean_len_nothink = opt_number(j, "mean_len_nothink");
  s.mean_entropy_think = opt_number(j, "mean_entropy_think");
  s.mean_entropy_nothink = opt_number(j, "mean_entropy_nothink");
  s.beta_l = req_number(j, "beta_l");
  s.loss = req_number(j, "loss");
  return s;
}

double acu(const AcuInputs& in) {
  if (!(in.params > 0.0)) throw std::invalid_argument("acu: params must be > 0");
  if (!(in.tokens > 0.0)) throw std::invalid_argument("acu: tokens must be > 0");
  if (!(in.accuracy >= 0.0 && in.accuracy <= 1.0)) {
    throw std::invalid_argument("acu: accuracy must be in [0, 1]");
  }
  return in.accuracy / (in.params * in.tokens) * 1e3;
}

LogWriter::LogWriter(const std::filesystem::path& path, bool append)
    : path_(path), out_(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc)) {
  if (!out_) throw std::runtime_error("cannot open log " + path.string());
}

void LogWriter::write(const TrainingSnapshot& s) {
  out_ << to_json(s).dump() << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("write failed: " + path_.string());
}

void emit_log(const std::vector<TrainingSnapshot>& snapshots, const std::filesystem::path& path) {
  LogWriter w(path);
  for (const auto& s : snapshots) w.write(s);
}

std::vector<TrainingSnapshot> read_log(const std::filesystem::path& path) {
  std::vector<TrainingSnapshot> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(snapshot_from_json(j)); });
  return out;
}

std::vector<std::string> render_plots(const std::filesystem::path& log_path,
                                      const std::filesystem::path& out_dir) {
  return render_plots(read_log(log_path), out_dir);
}

std::vector<std::string> render_plots(const std::vector<TrainingSnapshot>& snaps,
                                      const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<long> steps;
  std::vector<std::optional<double>> acc, rate, len_t, len_n, ent_t, ent_n, beta, reward, loss;
  for (const auto& s : snaps) {
    steps.push_back(s.step);
    acc.emplace_back(s.accuracy);
    rate.emplace_back(s.thinking_rate);
    len_t.push_back(s.mean_len_think);
    len_n.push_back(s.mean_len_nothink);
    ent_t.push_back(s.mean_entropy_think);
    ent_n.push_back(s.mean_entropy_nothink);
    beta.emplace_back(s.beta_l);
    reward.emplace_back(s.mean_reward);
    loss.emplace_back(s.loss);
  }
  const std::string think_color = "#c0392b", nothink_color = "#2471a3", plain = "#222222";
  const std::vector<std::pair<std::string, std::string>> charts = {
      {"accuracy.svg", svg_chart("accuracy", steps, {{"accuracy", plain, acc}})},
      {"thinking_rate.svg", svg_chart("thinking rate", steps, {{"thinking rate", plain, rate}})},
      {"response_length.svg",
       svg_chart("mean response length (tokens)", steps,
                 {{"think", think_color, len_t}, {"no_think", nothink_color, len_n}})},
      {"entropy.svg", svg_chart("mean step entropy", steps,
                                {{"think", think_color, ent_t}, {"no_think", nothink_color, ent_n}})},
      {"beta_l.svg", svg_chart("beta_l", steps, {{"beta_l", plain, beta}})},
      {"reward.svg", svg_chart("mean reward", steps, {{"reward", plain, reward}})},
      {"loss.svg", svg_chart("loss", steps, {{"loss", plain, loss}})},
  };
  std::vector<std::string> written;
  for (const auto& [name, text] : charts) {
    write_file(out_dir / name, text);
    written.push_back(name);
  }

  std::ostringstream csv;
  csv << "step,mean_reward,accuracy,thinking_rate,mean_len_think,mean_len_nothink,"
         "mean_entropy_think,mean_entropy_nothink,beta_l,loss\n";
  for (const auto& s : snaps) {
    csv << s.step << ',' << num(s.mean_reward, "%.17g") << ',' << num(s.accuracy, "%.17g") << ','
        << num(s.thinking_rate, "%.17g") << ',' << csv_cell(s.mean_len_think) << ','
        << csv_cell(s.mean_len_nothink) << ',' << csv_cell(s.mean_entropy_think) << ','
        << csv_cell(s.mean_entropy_nothink) << ',' << num(s.beta_l, "%.17g") << ','
        << num(s.loss, "%.17g") << '\n';
  }
  write_file(out_dir / "metrics.csv", csv.str());
  written.push_back("metrics.csv");
  return written;
}

}  // namespace autothink
