// SPDX-License-Identifier: Apache-2.0
// Host-side cost of the planners and the simulator.
#include "tilespmm/dynamic_plan.hpp"
#include "tilespmm/execute.hpp"
#include "tilespmm/matrix.hpp"
#include "tilespmm/rng.hpp"
#include "tilespmm/static_plan.hpp"
#include "tilespmm/sweep.hpp"

#include <benchmark/benchmark.h>

using namespace tilespmm;

namespace {

void BM_RandomBlockMask(benchmark::State &state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(random_block_mask(m, m, 4, 1.0 / 16, 1));
  }
}
BENCHMARK(BM_RandomBlockMask)->Arg(1024)->Arg(4096);

void BM_StaticSplitTable(benchmark::State &state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto mask = random_block_mask(m, m, 1, 1.0 / 16, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(StaticSplitTable::build(mask, 1472));
  }
}
BENCHMARK(BM_StaticSplitTable)->Arg(1024)->Arg(4096);

void BM_ChooseStaticGrid(benchmark::State &state) {
  const auto mask = random_block_mask(4096, 4096, 16, 1.0 / 16, 3);
  const MachineConfig machine;
  const auto splits = StaticSplitTable::build(mask, machine.tiles);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        choose_static_grid(mask, splits, n, machine, DataType::fp16));
  }
}
BENCHMARK(BM_ChooseStaticGrid)->Arg(16)->Arg(4096);

void BM_PlanDynamic(benchmark::State &state) {
  const MachineConfig machine;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        plan_dynamic(4096, 4096, n, 16, 1.0 / 16, machine, DataType::fp16));
  }
}
BENCHMARK(BM_PlanDynamic)->Arg(16)->Arg(4096);

void BM_EncodeBuckets(benchmark::State &state) {
  const auto mask = random_block_mask(2048, 2048, 1, 1.0 / 16, 4);
  const auto plan = make_dynamic_plan(2048, 2048, 64, 1, density(mask), 16, 16,
                                      4, MachineConfig{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_buckets(mask, {}, plan));
  }
}
BENCHMARK(BM_EncodeBuckets);

void BM_RunStatic(benchmark::State &state) {
  const auto s = random_block_sparse(random_block_mask(256, 256, 8, 0.125, 5), 5);
  const auto x = random_dense(256, 64, 6);
  const MachineConfig machine;
  const auto g = choose_static_grid(s.mask(), 64, machine);
  const auto plan = build_static_plan(s.mask(), g.qk, g.qn, 64, machine);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_static(plan, s, x, machine, DataType::fp16));
  }
}
BENCHMARK(BM_RunStatic);

void BM_RunDynamic(benchmark::State &state) {
  const auto s = random_block_sparse(random_block_mask(256, 256, 8, 0.125, 7), 7);
  const auto x = random_dense(256, 64, 8);
  const MachineConfig machine;
  const auto plan = plan_dynamic(256, 256, 64, 8, density(s.mask()), machine);
  const auto buckets = encode_buckets(s.mask(), s.values(), plan);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_dynamic(plan, buckets, x, machine, DataType::fp16));
  }
}
BENCHMARK(BM_RunDynamic);

void BM_DenseBaseline(benchmark::State &state) {
  const MachineConfig machine;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_dense_baseline(4096, 4096, 4096, machine, DataType::fp16));
  }
}
BENCHMARK(BM_DenseBaseline);

void BM_SmallSweep(benchmark::State &state) {
  SweepConfig config;
  config.m_list = {256, 512};
  config.n_list = {16, 1024};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sweep(config, MachineConfig{}));
  }
}
BENCHMARK(BM_SmallSweep)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
