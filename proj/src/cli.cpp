#include "autothink/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "autothink/config.hpp"
#include "autothink/data_pipeline.hpp"
#include "autothink/jsonl.hpp"
#include "autothink/report.hpp"
#include "autothink/trainer.hpp"

namespace autothink {
namespace {

std::string fmt(double v, const char* f = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int run_train(const std::string& config_path, const std::string& log_override, bool quiet,
              std::ostream& out) {
  auto rc = load_run_config(config_path);
  if (!log_override.empty()) rc.log_path = log_override;
  const auto log_path = rc.log_path.value_or("train_log.jsonl");
  LogWriter log(log_path);

  const auto& cfg = rc.train;
  TrainHooks hooks;
  const std::size_t every = std::max<std::size_t>(1, cfg.steps / 10);
  hooks.on_snapshot = [&](const TrainingSnapshot& s) {
    log.write(s);
    if (!quiet && (static_cast<std::size_t>(s.step) % every == 0)) {
      out << "step " << s.step << "  reward " << fmt(s.mean_reward) << "  acc "
          << fmt(s.accuracy) << "  think " << fmt(s.thinking_rate) << "  beta_l "
          << fmt(s.beta_l) << '\n';
    }
  };
  const auto result = train(cfg, hooks);

  out << "greedy evaluation on the training pool:\n";
  for (int d = 0; d < kNumDifficulties; ++d) {
    std::vector<SyntheticTask> tier;
    for (const auto& t : result.tasks) {
      if (t.difficulty == static_cast<Difficulty>(d)) tier.push_back(t);
    }
    if (tier.empty()) continue;
    const auto auto_eval = forced_mode_eval(result.params, tier, std::nullopt);
    out << "  " << to_string(static_cast<Difficulty>(d)) << ": n=" << tier.size()
        << " thinking_rate=" << fmt(auto_eval.thinking_rate)
        << " accuracy=" << fmt(auto_eval.accuracy)
        << " mean_tokens=" << fmt(auto_eval.mean_token_length, "%.1f") << '\n';
  }
  out << "log written to " << log_path.string() << '\n';
  return kExitOk;
}

int run_prepare(const std::string& in, const std::string& out_path, double keep, std::uint64_t seed,
                std::ostream& out) {
  const auto records = read_records(in);
  const auto n_in = records.size();
  const auto prepared = prepare_records(records, PrepareOptions{keep, seed});
  write_records(out_path, prepared);
  out << "prepare-data: " << n_in << " -> " << prepared.size() << " records\n";
  return kExitOk;
}

int run_sft_mix(const std::string& in, const std::string& out_path, std::ostream& out) {
  const auto mix = build_sft_mix(read_turn_candidates(in));
  write_sft_turns(out_path, mix.turns);
  out << "sft-mix: " << mix.turns.size() << " turns, thinking_rate " << fmt(mix.thinking_rate)
      << '\n';
  return kExitOk;
}

int run_score(const std::string& responses_path, const std::string& gt_path,
              const RewardConfig& cfg, const std::string& out_path, std::ostream& out) {
  std::vector<std::string> responses;
  for_each_jsonl(responses_path, [&](const Json& j, std::size_t) {
    if (j.is_string()) {
      responses.push_back(j.get<std::string>());
    } else if (j.is_object() && j.contains("response") && j.at("response").is_string()) {
      responses.push_back(j.at("response").get<std::string>());
    } else {
      throw std::invalid_argument("expected a string or {\"response\": string}");
    }
  });
  std::vector<GroundTruth> truths;
  for_each_jsonl(gt_path, [&](const Json& j, std::size_t) {
    truths.push_back(ground_truth_from_json(j.contains("expected") ? j.at("expected") : j));
  });
  if (responses.size() != truths.size()) {
    throw DataError("score: " + std::to_string(responses.size()) + " responses but " +
                    std::to_string(truths.size()) + " ground truths");
  }
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw DataError("cannot write " + out_path);
  }
  std::ostream& sink = out_path.empty() ? out : file;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    sink << to_json(composite_reward(responses[i], truths[i], cfg)).dump() << '\n';
  }
  return kExitOk;
}

int run_report(const std::string& log_path, const std::string& out_dir, std::ostream& out) {
  const auto files = render_plots(log_path, out_dir);
  out << "report: wrote";
  for (const auto& f : files) out << ' ' << f;
  out << " to " << out_dir << '\n';
  return kExitOk;
}

int run_env_oracle(const std::string& config_path, bool as_json, std::ostream& out) {
  const auto rc = load_run_config(config_path);
  const auto k = rc.train.num_symbols;
  const auto rows = env_oracle_table(k);
  if (as_json) {
    for (const auto& r : rows) {
      out << Json{{"difficulty", std::string(to_string(r.difficulty))},
                  {"mode", std::string(to_string(r.mode))},
                  {"best_accuracy", r.best_accuracy},
                  {"best_expected_reward", r.best_expected_reward},
                  {"uniform_accuracy", r.uniform_accuracy},
                  {"uniform_expected_reward", r.uniform_expected_reward}}
                 .dump()
          << '\n';
    }
    return kExitOk;
  }
  out << "closed-form expected answer reward, K=" << k << "\n";
  out << "difficulty  mode      best_acc  best_reward  uniform_acc  uniform_reward\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-10s  %-8s  %8.4f  %11.4f  %11.4f  %14.4f\n",
                  std::string(to_string(r.difficulty)).c_str(),
                  std::string(to_string(r.mode)).c_str(), r.best_accuracy,
                  r.best_expected_reward, r.uniform_accuracy, r.uniform_expected_reward);
    out << line;
  }
  for (int d = 0; d < kNumDifficulties; ++d) {
    const auto diff = static_cast<Difficulty>(d);
    out << "optimal mode for " << to_string(diff) << ": " << to_string(oracle_mode(diff, k))
        << '\n';
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive think/no-think GRPO toy trainer and data tools", "autothink"};
  app.require_subcommand(1);

  std::string config, log_override, in, out_path, responses, truths, log_path, out_dir;
  bool quiet = false, as_json = false;
  double keep = kDefaultKeepFraction;
  std::uint64_t seed = 0;
  RewardConfig reward_cfg;

  auto* train_cmd = app.add_subcommand("train", "run toy GRPO training from a JSON config");
  train_cmd->add_option("config", config, "config JSON")->required();
  train_cmd->add_option("--log", log_override, "training log path (overrides log_path)");
  train_cmd->add_flag("-q,--quiet", quiet, "only print the final summary");

  auto* prep_cmd = app.add_subcommand("prepare-data", "stratify, rebalance and refine records");
  prep_cmd->add_option("input", in, "input JSONL")->required();
  prep_cmd->add_option("output", out_path, "output JSONL")->required();
  prep_cmd->add_option("--keep-fraction", keep, "fraction kept by variance refinement")
      ->check(CLI::Range(0.0, 1.0));
  prep_cmd->add_option("--seed", seed, "rebalance seed");

  auto* sft_cmd = app.add_subcommand("sft-mix", "build mixed think/no-think SFT turns");
  sft_cmd->add_option("input", in, "turn candidates JSONL")->required();
  sft_cmd->add_option("output", out_path, "SFT turns JSONL")->required();

  auto* score_cmd = app.add_subcommand("score", "score responses against ground truth");
  score_cmd->add_option("responses", responses, "responses JSONL")->required();
  score_cmd->add_option("groundtruth", truths, "ground truth JSONL")->required();
  score_cmd->add_option("-o,--out", out_path, "write breakdowns here instead of stdout");
  score_cmd->add_option("--length-target", reward_cfg.target_length,
                        "enable the short-response penalty below this many tokens");
  score_cmd->add_option("--length-penalty", reward_cfg.penalty_magnitude, "penalty magnitude");
  score_cmd->add_option("--invalid-format-reward", reward_cfg.invalid_format_reward,
                        "reward for responses that break the template");

  auto* report_cmd = app.add_subcommand("report", "render plots and CSV from a training log");
  report_cmd->add_option("log", log_path, "training log JSONL")->required();
  report_cmd->add_option("out_dir", out_dir, "output directory")->required();

  auto* oracle_cmd = app.add_subcommand("env-oracle", "closed-form expected rewards per tier");
  oracle_cmd->add_option("config", config, "config JSON")->required();
  oracle_cmd->add_flag("--json", as_json, "emit JSON lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*train_cmd) return run_train(config, log_override, quiet, out);
    if (*prep_cmd) {
      if (!(keep > 0.0)) {
        err << "--keep-fraction must be in (0, 1]\n";
        return kExitUsage;
      }
      return run_prepare(in, out_path, keep, seed, out);
    }
    if (*sft_cmd) return run_sft_mix(in, out_path, out);
    if (*score_cmd) {
      reward_cfg.length_penalty_enabled = score_cmd->count("--length-target") > 0;
      return run_score(responses, truths, reward_cfg, out_path, out);
    }
    if (*report_cmd) return run_report(log_path, out_dir, out);
    if (*oracle_cmd) return run_env_oracle(config, as_json, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace autothink
