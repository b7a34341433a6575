// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/error.hpp"
#include "tilespmm/matrix.hpp"
#include "tilespmm/rng.hpp"
#include "tilespmm/static_plan.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace tilespmm;

namespace {

std::vector<std::size_t> partition_counts(const std::vector<std::size_t> &counts,
                                          const std::vector<std::size_t> &bounds) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
    out.push_back(std::accumulate(counts.begin() + bounds[p],
                                  counts.begin() + bounds[p + 1], std::size_t{0}));
  }
  return out;
}

// Only per-tile MACs matter: one MAC per cycle, free exchange, sync and adds.
MachineConfig mac_only_machine(std::size_t tiles) {
  MachineConfig m;
  m.tiles = tiles;
  m.sync_cycles = 0;
  m.exchange_bytes_per_cycle = 1ULL << 50;
  m.macs_per_cycle_table = {{{1, 1, 1, 1}, {1, 1, 1, 1}}};
  return m;
}

} // namespace

TEST(BalancedKSplits, UniformMaskSplitsEvenly) {
  const auto mask = BlockMask::full(16, 48, 4); // 12 block columns, 4 each
  for (std::size_t qk : {1U, 2U, 3U, 4U, 6U, 12U}) {
    const auto bounds = balanced_k_splits(mask, qk);
    ASSERT_EQ(bounds.size(), qk + 1);
    for (const auto c : partition_counts(mask.column_counts(), bounds)) {
      EXPECT_EQ(c, mask.num_blocks() / qk);
    }
  }
}

TEST(BalancedKSplits, SinglePartitionOwnsAll) {
  const auto mask = random_block_mask(32, 32, 4, 0.5, 2);
  EXPECT_EQ(balanced_k_splits(mask, 1), (std::vector<std::size_t>{0, 8}));
}

TEST(BalancedKSplits, AllBlocksInFirstColumn) {
  std::vector<BlockCoord> coords;
  for (std::uint32_t r = 0; r < 6; ++r) {
    coords.push_back({r, 0});
  }
  const BlockMask mask(24, 24, 4, coords);
  const auto bounds = balanced_k_splits(mask, 3);
  EXPECT_EQ(partition_counts(mask.column_counts(), bounds),
            (std::vector<std::size_t>{6, 0, 0}));
  EXPECT_TRUE(std::is_sorted(bounds.begin(), bounds.end()));
  EXPECT_EQ(std::adjacent_find(bounds.begin(), bounds.end()), bounds.end());
}

TEST(BalancedKSplits, HandTracedCounts) {
  const std::vector<std::size_t> counts{3, 3, 3, 3, 1};
  // target = ceil(13/2) = 7: 3+3 < 7, +3 = 9 closes at column 3.
  EXPECT_EQ(balanced_k_splits(counts, 2), (std::vector<std::size_t>{0, 3, 5}));
}

TEST(BalancedKSplits, RejectsBadQk) {
  const std::vector<std::size_t> counts{1, 2};
  EXPECT_THROW(balanced_k_splits(counts, 0), Error);
  EXPECT_THROW(balanced_k_splits(counts, 3), Error);
}

TEST(BalancedKSplits, BalanceBoundOnRandomMasks) {
  SplitMix64 gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t b = kBlockSizes[gen.below(4)];
    const std::size_t m = b * (1 + gen.below(16));
    const std::size_t k = b * (1 + gen.below(40));
    const double d = 0.05 + 0.9 * (gen.symmetric_unit() + 1) / 2;
    BlockMask mask = BlockMask(m, k, b, {});
    try {
      mask = random_block_mask(m, k, b, d, gen.next());
    } catch (const Error &) {
      continue;
    }
    const auto counts = mask.column_counts();
    const std::size_t maxCol = *std::max_element(counts.begin(), counts.end());
    const std::size_t qk = 1 + gen.below(counts.size());
    const auto bounds = balanced_k_splits(counts, qk);
    ASSERT_EQ(bounds.size(), qk + 1);
    EXPECT_EQ(bounds.front(), 0U);
    EXPECT_EQ(bounds.back(), counts.size());
    for (std::size_t p = 0; p < qk; ++p) {
      EXPECT_LT(bounds[p], bounds[p + 1]);
    }
    const auto parts = partition_counts(counts, bounds);
    const std::size_t target = (mask.num_blocks() + qk - 1) / qk;
    EXPECT_LE(*std::max_element(parts.begin(), parts.end()),
              target + maxCol - 1);
    EXPECT_EQ(std::accumulate(parts.begin(), parts.end(), std::size_t{0}),
              mask.num_blocks());
  }
}

// The greedy rule does not bound max - min(nonempty) by the largest column.
TEST(BalancedKSplits, SpreadCanExceedLargestColumn) {
  const std::vector<std::size_t> counts{3, 3, 3, 3, 1};
  const auto parts = partition_counts(counts, balanced_k_splits(counts, 2));
  EXPECT_EQ(parts, (std::vector<std::size_t>{9, 4}));
  EXPECT_GT(parts[0] - parts[1], 3U);
}

TEST(StaticSplitTable, MatchesDirectSplits) {
  const auto mask = random_block_mask(64, 128, 4, 0.3, 5);
  const auto table = StaticSplitTable::build(mask, 20);
  ASSERT_EQ(table.max_blocks.size(), 20U);
  const auto counts = mask.column_counts();
  for (std::size_t qk = 1; qk <= 20; ++qk) {
    const auto parts = partition_counts(counts, balanced_k_splits(counts, qk));
    EXPECT_EQ(table.max_blocks[qk - 1],
              *std::max_element(parts.begin(), parts.end()));
  }
}

TEST(ChooseStaticGrid, OneTileMachine) {
  const auto mask = random_block_mask(64, 64, 4, 0.25, 1);
  MachineConfig machine;
  machine.tiles = 1;
  EXPECT_EQ(choose_static_grid(mask, 32, machine), (StaticGrid{1, 1}));
}

TEST(ChooseStaticGrid, NineByNineOnThreeTilesSplitsK) {
  const auto mask = BlockMask::full(9, 9, 1);
  EXPECT_EQ(choose_static_grid(mask, 1, mac_only_machine(3)),
            (StaticGrid{3, 1}));
}

TEST(ChooseStaticGrid, RespectsTileBudget) {
  const MachineConfig machine;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto mask = random_block_mask(256, 256, 8, 0.125, seed);
    for (std::size_t n : {1U, 16U, 1000U}) {
      const auto g = choose_static_grid(mask, n, machine, DataType::fp32);
      EXPECT_LE(g.qk * g.qn, machine.tiles);
      EXPECT_LE(g.qk, mask.block_cols());
      EXPECT_LE(g.qn, n);
    }
  }
}

TEST(BuildStaticPlan, SingleTileOwnsEverything) {
  const auto mask = random_block_mask(32, 32, 4, 0.5, 4);
  const auto plan = build_static_plan(mask, 1, 1, 10, MachineConfig{});
  ASSERT_EQ(plan.partition_blocks.size(), 1U);
  EXPECT_EQ(plan.partition_blocks[0].size(), mask.num_blocks());
  EXPECT_EQ(plan.n_boundaries, (std::vector<std::size_t>{0, 10}));
  EXPECT_EQ(plan.tile_of, (std::vector<std::size_t>{0}));
}

TEST(BuildStaticPlan, CoverageDisjointnessAndTiles) {
  const auto mask = random_block_mask(64, 96, 4, 0.2, 6);
  const auto plan = build_static_plan(mask, 5, 3, 10, MachineConfig{});
  std::vector<int> seen(mask.num_blocks(), 0);
  for (std::size_t pk = 0; pk < plan.qk; ++pk) {
    for (const auto idx : plan.partition_blocks[pk]) {
      ++seen[idx];
      const auto col = mask.coords()[idx].col;
      EXPECT_GE(col, plan.k_boundaries[pk]);
      EXPECT_LT(col, plan.k_boundaries[pk + 1]);
    }
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  EXPECT_EQ(plan.n_boundaries, (std::vector<std::size_t>{0, 3, 6, 10}));
  std::vector<std::size_t> tiles = plan.tile_of;
  std::sort(tiles.begin(), tiles.end());
  EXPECT_EQ(std::unique(tiles.begin(), tiles.end()), tiles.end());
  EXPECT_EQ(tiles.size(), 15U);
  EXPECT_EQ(plan.tile(2, 1), 7U);
}

TEST(BuildStaticPlan, NineByNineOnThreeTiles) {
  const auto mask = BlockMask::full(9, 9, 1);
  const auto plan = build_static_plan(mask, 3, 1, 1, mac_only_machine(3));
  for (const auto &blocks : plan.partition_blocks) {
    EXPECT_EQ(blocks.size(), 27U);
  }
}

TEST(BuildStaticPlan, Deterministic) {
  const auto mask = random_block_mask(64, 64, 1, 0.1, 9);
  const auto a = build_static_plan(mask, 7, 2, 33, MachineConfig{});
  const auto b = build_static_plan(mask, 7, 2, 33, MachineConfig{});
  EXPECT_EQ(a.k_boundaries, b.k_boundaries);
  EXPECT_EQ(a.partition_blocks, b.partition_blocks);
}

TEST(BuildStaticPlan, RejectsInfeasibleGrid) {
  const auto mask = random_block_mask(32, 32, 4, 0.5, 4);
  MachineConfig machine;
  machine.tiles = 4;
  EXPECT_THROW(build_static_plan(mask, 3, 2, 8, machine), Error);
  EXPECT_THROW(build_static_plan(mask, 1, 9, 8, machine), Error);
}

TEST(ReorderValues, SinglePartitionIsIdentity) {
  const auto s = random_block_sparse(random_block_mask(32, 32, 4, 0.5, 3), 3);
  const auto plan = build_static_plan(s.mask(), 1, 2, 8, MachineConfig{});
  const auto slices = reorder_values(s, plan);
  ASSERT_EQ(slices.size(), 1U);
  EXPECT_TRUE(std::equal(slices[0].begin(), slices[0].end(), s.values().begin(),
                         s.values().end()));
}

TEST(ReorderValues, RoundTrip) {
  const auto s = random_block_sparse(random_block_mask(64, 64, 8, 0.4, 12), 12);
  const auto plan = build_static_plan(s.mask(), 4, 1, 8, MachineConfig{});
  const auto slices = reorder_values(s, plan);
  const std::size_t area = 64;
  std::vector<Real> back(s.values().size(), 0);
  std::size_t blocks = 0;
  for (std::size_t pk = 0; pk < plan.qk; ++pk) {
    ASSERT_EQ(slices[pk].size(), plan.partition_blocks[pk].size() * area);
    for (std::size_t t = 0; t < plan.partition_blocks[pk].size(); ++t) {
      std::copy_n(slices[pk].begin() + t * area, area,
                  back.begin() + plan.partition_blocks[pk][t] * area);
      ++blocks;
    }
  }
  EXPECT_EQ(blocks, s.mask().num_blocks());
  EXPECT_TRUE(std::equal(back.begin(), back.end(), s.values().begin()));
}

TEST(ReorderValues, RejectsOtherMask) {
  const auto s = random_block_sparse(random_block_mask(32, 32, 4, 0.5, 3), 3);
  const auto other = random_block_mask(32, 32, 4, 0.5, 4);
  const auto plan = build_static_plan(other, 2, 1, 8, MachineConfig{});
  EXPECT_THROW(reorder_values(s, plan), Error);
}
