#include <benchmark/benchmark.h>

#include "ccc/bitgrid.hpp"
#include "ccc/metrics.hpp"
#include "ccc/tally.hpp"

using namespace ccc;

namespace {

void set_rate(benchmark::State& state, double comparisons_per_iter) {
  state.counters["comparisons/s"] =
      benchmark::Counter(comparisons_per_iter, benchmark::Counter::kIsIterationInvariantRate);
}

void BM_PairTally(benchmark::State& state) {
  const auto n_f = static_cast<std::size_t>(state.range(0));
  const auto s = generate_random(2, n_f, 1);
  for (auto _ : state) benchmark::DoNotOptimize(pair_tally(s.column(0), s.column(1)));
  set_rate(state, static_cast<double>(n_f));
}
BENCHMARK(BM_PairTally)->Arg(1024)->Arg(65536);

void BM_PairTallyPacked(benchmark::State& state) {
  const auto n_f = static_cast<std::size_t>(state.range(0));
  const auto s = generate_random(2, n_f, 1);
  for (auto _ : state) benchmark::DoNotOptimize(pair_tally_packed(s.column(0), s.column(1)));
  set_rate(state, static_cast<double>(n_f));
}
BENCHMARK(BM_PairTallyPacked)->Arg(1024)->Arg(65536);

void BM_SparsePairTally(benchmark::State& state) {
  const auto n_f = static_cast<std::size_t>(state.range(0));
  const auto s = generate_random_sparse(2, n_f, 1, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(sparse_pair_tally(s.column(0), s.column(1)));
  set_rate(state, static_cast<double>(n_f));
}
BENCHMARK(BM_SparsePairTally)->Arg(65536);

void BM_BlockTally2(benchmark::State& state) {
  const auto n_v = static_cast<std::size_t>(state.range(0));
  const std::size_t n_f = 8192;
  const auto s = generate_random(n_v, n_f, 2);
  for (auto _ : state) benchmark::DoNotOptimize(block_tally2(s, {0, n_v}, s, {0, n_v}));
  set_rate(state, static_cast<double>(n_v * n_v * n_f));
}
BENCHMARK(BM_BlockTally2)->Arg(64)->Arg(256);

void BM_Block3Step(benchmark::State& state) {
  const auto n_v = static_cast<std::size_t>(state.range(0));
  const std::size_t n_f = 8192;
  const auto s = generate_random(n_v + 1, n_f, 3);
  const auto x = x_construct(s.column(n_v), s, {0, n_v}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(block_tally3_step(x, s, {0, n_v}));
  set_rate(state, static_cast<double>(n_v * n_v * n_f));
}
BENCHMARK(BM_Block3Step)->Arg(64)->Arg(256);

void BM_PivotBlock3(benchmark::State& state) {
  const auto n_v = static_cast<std::size_t>(state.range(0));
  const std::size_t n_f = 4096;
  const auto s = generate_random(n_v + 1, n_f, 4);
  for (auto _ : state) benchmark::DoNotOptimize(pivot_block3(s.column(n_v), s, {0, n_v}, s, {0, n_v}));
  set_rate(state, static_cast<double>(n_v * n_v * n_f));
}
BENCHMARK(BM_PivotBlock3)->Arg(64);

}  // namespace
BENCHMARK_MAIN();
