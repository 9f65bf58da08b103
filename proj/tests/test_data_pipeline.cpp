#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "autothink/data_pipeline.hpp"
#include "autothink/jsonl.hpp"
#include "support.hpp"

using namespace autothink;

namespace {

std::array<std::size_t, 3> histogram(const std::vector<SampleRecord>& rs) {
  std::array<std::size_t, 3> h{};
  for (const auto& r : rs) ++h[static_cast<int>(*r.difficulty)];
  return h;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SampleRecord with_variance(std::int64_t id, double v) {
  SampleRecord r;
  r.id = id;
  r.variance = v;
  return r;
}

}  // namespace

TEST_CASE("stratify by pass@k") {
  CHECK(difficulty_from_bits(std::vector<bool>(8, true), 8) == Difficulty::kEasy);
  CHECK(difficulty_from_bits(std::vector<bool>(8, false), 8) == Difficulty::kHard);
  std::vector<bool> three(8, false);
  three[0] = three[3] = three[7] = true;
  CHECK(difficulty_from_bits(three, 8) == Difficulty::kMedium);
  CHECK_THROWS(difficulty_from_bits(three, 7));
}

TEST_CASE("stratify commutes with permutation") {
  auto recs = testing::tier_fixture(20, 10, 15);
  auto shuffled = recs;
  std::reverse(shuffled.begin(), shuffled.end());
  const auto a = stratify(recs, 8);
  const auto b = stratify(shuffled, 8);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].difficulty == b[a.size() - 1 - i].difficulty);
}

TEST_CASE("rebalance halves easy and hard with ceiling counts") {
  const auto recs = stratify(testing::tier_fixture(100, 50, 60), 8);
  const auto out = rebalance(recs, 3);
  CHECK(histogram(out) == std::array<std::size_t, 3>{50, 50, 30});
  // Survivors keep input order.
  std::size_t last = 0;
  for (const auto& r : out) {
    const auto id = static_cast<std::size_t>(r.id.get<std::int64_t>());
    CHECK((id >= last || last == 0));
    last = id;
  }
  const auto again = rebalance(recs, 3);
  REQUIRE(again.size() == out.size());
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(again[i].id == out[i].id);
  const auto other = rebalance(recs, 4);
  bool differs = false;
  for (std::size_t i = 0; i < out.size(); ++i) differs |= other[i].id != out[i].id;
  CHECK(differs);

  const auto one = rebalance(stratify(testing::tier_fixture(1, 0, 0), 8), 0);
  CHECK(one.empty());
}

TEST_CASE("reward_variance") {
  CHECK(reward_variance(std::vector<double>{1, 1, 1}) == 0.0);
  CHECK(reward_variance(std::vector<double>{0, 1}) == 0.5);
  CHECK(reward_variance(std::vector<double>{0.7, 0.8, 0.9}) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_THROWS(reward_variance(std::vector<double>{1}));
}

TEST_CASE("variance_refine keeps the low-variance prefix") {
  std::vector<SampleRecord> rs{with_variance(3, 0.3), with_variance(0, 0.0), with_variance(2, 0.2),
                               with_variance(1, 0.1)};
  const auto half = variance_refine(rs, 0.5);
  REQUIRE(half.size() == 2);
  CHECK(*half[0].variance == 0.0);
  CHECK(*half[1].variance == 0.1);
  CHECK(variance_refine(rs, 1.0).size() == 4);
  CHECK_THROWS(variance_refine(rs, 0.0));
  CHECK_THROWS(variance_refine(rs, 1.5));

  // Ties break on id.
  std::vector<SampleRecord> ties{with_variance(5, 0.1), with_variance(2, 0.1), with_variance(9, 0.0)};
  const auto t = variance_refine(ties, 0.6);
  REQUIRE(t.size() == 2);
  CHECK(t[1].id == 2);
}

TEST_CASE("variance_refine: retained never exceeds removed") {
  auto recs = testing::tier_fixture(100, 100, 100);
  assign_variances(recs);
  for (double keep : {0.1, 0.45, 0.9}) {
    const auto kept = variance_refine(recs, keep);
    CHECK(kept.size() == ceil_count(keep * 300));
    double max_kept = 0;
    for (const auto& r : kept) max_kept = std::max(max_kept, *r.variance);
    std::size_t at_or_below = 0;
    for (const auto& r : recs) at_or_below += *r.variance <= max_kept;
    CHECK(at_or_below >= kept.size());
  }
}

TEST_CASE("pipeline counts on a 1000-record fixture") {
  auto recs = testing::tier_fixture(470, 212, 318);
  const auto strat = stratify(recs, 8);
  CHECK(histogram(strat) == std::array<std::size_t, 3>{470, 212, 318});
  const auto rebal = rebalance(strat, 1);
  CHECK(histogram(rebal) == std::array<std::size_t, 3>{235, 212, 159});
  const auto out = prepare_records(recs, PrepareOptions{0.45, 1});
  CHECK(out.size() == 273);
}

TEST_CASE("pipeline counts on a 21k fixture") {
  const auto out = prepare_records(testing::tier_fixture(9870, 4452, 6678), PrepareOptions{0.45, 7});
  CHECK(out.size() == 5727);
}

TEST_CASE("prepare-data output is byte-identical across reruns") {
  const auto dir = std::filesystem::temp_directory_path() / "autothink_pipeline_test";
  std::filesystem::create_directories(dir);
  write_records(dir / "in.jsonl", testing::tier_fixture(47, 21, 32));
  for (const char* name : {"a.jsonl", "b.jsonl"}) {
    write_records(dir / name, prepare_records(read_records(dir / "in.jsonl"), {0.45, 5}));
  }
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));
  CHECK_FALSE(slurp(dir / "a.jsonl").empty());
  const auto back = read_records(dir / "a.jsonl");
  for (const auto& r : back) {
    CHECK(r.difficulty.has_value());
    CHECK(r.variance.has_value());
  }
}

TEST_CASE("record parsing errors carry line numbers") {
  const auto path = std::filesystem::temp_directory_path() / "autothink_bad_records.jsonl";
  {
    std::ofstream out(path);
    out << to_json(testing::tier_fixture(1, 0, 0)[0]).dump() << "\n";
    out << R"({"id": 1, "prompt": "p", "expected": {"type": "text", "text": "x"}, "correctness_bits": [1]})"
        << "\n";
  }
  try {
    read_records(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("build_sft_mix follows the label rule") {
  const std::string think =
      "[mode]think[/mode][think]weigh options[/think][tool_call][{\"name\":\"f\","
      "\"arguments\":{}}][/tool_call]";
  std::vector<TurnCandidate> cands{
      {"a", R"([{"name":"f","arguments":{"x":1}}])", true, std::nullopt, false},
      {"b", "plain answer", false, think, true},
      {"c", "dropped", false, std::nullopt, false},
      {"d", "plain answer", true, think, true},
  };
  const auto mix = build_sft_mix(cands);
  REQUIRE(mix.turns.size() == 3);
  CHECK(mix.turns[0].mode == ReasoningMode::kNoThink);
  CHECK(mix.turns[0].label_text ==
        "[mode]no_think[/mode][no_think]\n[/no_think][tool_call][{\"arguments\":{\"x\":1},"
        "\"name\":\"f\"}][/tool_call]");
  CHECK(mix.turns[1].mode == ReasoningMode::kThink);
  // Think labels are re-rendered from the parsed response.
  CHECK(mix.turns[1].label_text ==
        "[mode]think[/mode][think]weigh options[/think][tool_call][{\"arguments\":{},"
        "\"name\":\"f\"}][/tool_call]");
  CHECK(mix.turns[2].label_text == "[mode]no_think[/mode][no_think]\n[/no_think]plain answer");
  CHECK(mix.thinking_rate == doctest::Approx(1.0 / 3.0));
  for (const auto& t : mix.turns) {
    const auto parsed = parse_response(t.label_text);
    REQUIRE(std::holds_alternative<ParsedResponse>(parsed));
    CHECK(std::get<ParsedResponse>(parsed).mode == t.mode);
  }
}

TEST_CASE("build_sft_mix thinking rate on the 91/9 fixture") {
  const std::string think = "[mode]think[/mode][think]r[/think]answer";
  std::vector<TurnCandidate> cands;
  for (int i = 0; i < 908; ++i) cands.push_back({std::to_string(i), "gt", true, std::nullopt, false});
  for (int i = 0; i < 92; ++i) cands.push_back({"t" + std::to_string(i), "gt", false, think, true});
  CHECK(build_sft_mix(cands).thinking_rate == doctest::Approx(0.092).epsilon(1e-12));
  cands.resize(91);
  for (int i = 0; i < 9; ++i) cands.push_back({"t" + std::to_string(i), "gt", false, think, true});
  CHECK(build_sft_mix(cands).thinking_rate == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(build_sft_mix({}).thinking_rate == 0.0);
}

TEST_CASE("build_sft_mix rejects a think answer outside the grammar") {
  std::vector<TurnCandidate> cands{{"x", "gt", false, std::string("just text"), true}};
  CHECK_THROWS_AS(build_sft_mix(cands), std::invalid_argument);
}
