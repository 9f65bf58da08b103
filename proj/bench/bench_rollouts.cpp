// Serial vs OpenMP rollout sampling and batch evaluation.
#include <benchmark/benchmark.h>

#include "autothink/trainer.hpp"

namespace {

using namespace autothink;

struct Fixture {
  std::vector<SyntheticTask> tasks;
  std::vector<const SyntheticTask*> prompts;
  PolicyParams params;

  Fixture(std::size_t n_prompts, std::size_t k)
      : tasks(generate_tasks(7, n_prompts, kDefaultMix, k)), params(initial_policy(k, 2.0)) {
    for (const auto& t : tasks) prompts.push_back(&t);
  }
};

constexpr std::size_t kGroup = 8;

template <bool Parallel>
void BM_SampleBatch(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), 16);
  std::uint64_t step = 0;
  for (auto _ : state) {
    auto batch = Parallel ? sample_batch_parallel(f.params, f.prompts, kGroup, 1, step++, {})
                          : sample_batch_serial(f.params, f.prompts, kGroup, 1, step++, {});
    benchmark::DoNotOptimize(batch.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * kGroup);
}

template <bool Parallel>
void BM_EvaluateBatch(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), 16);
  const auto batch = sample_batch_serial(f.params, f.prompts, kGroup, 1, 0, {});
  for (auto _ : state) {
    auto eval = Parallel ? evaluate_batch_parallel(f.params, f.prompts, kGroup, batch)
                         : evaluate_batch_serial(f.params, f.prompts, kGroup, batch);
    benchmark::DoNotOptimize(eval.d_logprob.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * kGroup);
}

BENCHMARK(BM_SampleBatch<false>)->Name("sample_batch/serial")->Arg(16)->Arg(256);
BENCHMARK(BM_SampleBatch<true>)->Name("sample_batch/parallel")->Arg(16)->Arg(256);
BENCHMARK(BM_EvaluateBatch<false>)->Name("evaluate_batch/serial")->Arg(16)->Arg(256);
BENCHMARK(BM_EvaluateBatch<true>)->Name("evaluate_batch/parallel")->Arg(16)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
