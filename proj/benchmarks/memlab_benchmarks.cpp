#include <benchmark/benchmark.h>

#include <random>

#include "memlab/simulation.hpp"

namespace {

using namespace memlab;

void BM_RetrieveTopK(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  MemoryBank bank(6);
  std::vector<double> row(6);
  for (std::size_t i = 0; i < size; ++i) {
    for (auto& v : row) v = normal(gen);
    bank.insert_record(row, 0.0, std::nullopt, 0, Origin::initial);
  }
  std::vector<double> q(6);
  for (auto& v : q) v = normal(gen);
  for (auto _ : state) benchmark::DoNotOptimize(retrieve_top_k(bank, q, 6, cosine_similarity));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(size));
}
BENCHMARK(BM_RetrieveTopK)->Arg(100)->Arg(1000)->Arg(4100);

void BM_RunStream(benchmark::State& state) {
  SimulationConfig c;
  c.seed = 3;
  c.stream_length = static_cast<std::size_t>(state.range(0));
  c.addition = state.range(1) ? EvaluatorSpec::add_all() : EvaluatorSpec::strict();
  for (auto _ : state) benchmark::DoNotOptimize(run_stream(c));
}
BENCHMARK(BM_RunStream)->Args({4000, 1})->Args({4000, 0})->Unit(benchmark::kMillisecond);

void BM_ShiftedStream(benchmark::State& state) {
  auto env = generate_environment(5);
  std::vector<TaskInstance> tasks;
  for (int i = 0; i < 4000; ++i) tasks.push_back(env.sample_task());
  for (auto _ : state) benchmark::DoNotOptimize(make_shifted_stream(tasks, 3, 5));
}
BENCHMARK(BM_ShiftedStream)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
