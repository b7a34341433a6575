// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/static_plan.hpp"

#include "tilespmm/dynamic_plan.hpp"
#include "tilespmm/error.hpp"
#include "tilespmm/schedule.hpp"

#include <algorithm>
#include <numeric>

namespace tilespmm {

std::size_t StaticPlan::max_partition_blocks() const {
  std::size_t best = 0;
  for (const auto &blocks : partition_blocks) {
    best = std::max(best, blocks.size());
  }
  return best;
}

std::size_t StaticPlan::max_n_slice() const {
  std::size_t best = 0;
  for (std::size_t pn = 0; pn < qn; ++pn) {
    best = std::max(best, n_slice(pn));
  }
  return best;
}

std::vector<std::size_t>
balanced_k_splits(std::span<const std::size_t> column_counts, std::size_t qk) {
  const std::size_t cols = column_counts.size();
  if (qk == 0 || qk > cols) {
    throw Error("cannot split " + std::to_string(cols) +
                " block columns into " + std::to_string(qk) + " partitions");
  }
  const std::size_t total =
      std::accumulate(column_counts.begin(), column_counts.end(),
                      std::size_t{0});
  const std::size_t target = (total + qk - 1) / qk;

  std::vector<std::size_t> bounds{0};
  bounds.reserve(qk + 1);
  std::size_t acc = 0;
  for (std::size_t j = 0; j < cols; ++j) {
    acc += column_counts[j];
    const std::size_t closed = bounds.size() - 1;
    if (closed + 1 >= qk) {
      continue;
    }
    const std::size_t colsLeft = cols - (j + 1);
    const std::size_t partsLeft = qk - closed - 1;
    if (acc >= target || colsLeft == partsLeft) {
      bounds.push_back(j + 1);
      acc = 0;
    }
  }
  bounds.push_back(cols);
  return bounds;
}

std::vector<std::size_t> balanced_k_splits(const BlockMask &mask,
                                           std::size_t qk) {
  const auto counts = mask.column_counts();
  return balanced_k_splits(counts, qk);
}

namespace {

std::size_t max_range_sum(std::span<const std::size_t> prefix,
                          std::span<const std::size_t> bounds) {
  std::size_t best = 0;
  for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
    best = std::max(best, prefix[bounds[p + 1]] - prefix[bounds[p]]);
  }
  return best;
}

std::size_t last_heavy_size(std::size_t dim, std::size_t q) {
  return dim - (q - 1) * (dim / q);
}

} // namespace

StaticSplitTable StaticSplitTable::build(const BlockMask &mask,
                                         std::size_t tiles) {
  const auto counts = mask.column_counts();
  std::vector<std::size_t> prefix(counts.size() + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), prefix.begin() + 1);
  StaticSplitTable table;
  const std::size_t maxQk = std::min(tiles, counts.size());
  table.max_blocks.reserve(maxQk);
  for (std::size_t qk = 1; qk <= maxQk; ++qk) {
    table.max_blocks.push_back(
        max_range_sum(prefix, balanced_k_splits(counts, qk)));
  }
  return table;
}

StaticGrid choose_static_grid(const BlockMask &mask, std::size_t n,
                              const MachineConfig &machine, DataType dtype) {
  return choose_static_grid(mask, StaticSplitTable::build(mask, machine.tiles),
                            n, machine, dtype);
}

StaticGrid choose_static_grid(const BlockMask &mask,
                              const StaticSplitTable &splits, std::size_t n,
                              const MachineConfig &machine, DataType dtype) {
  if (n == 0) {
    throw Error("batch size n must be positive");
  }
  StaticWork work;
  work.m = mask.m();
  work.k = mask.k();
  work.n = n;
  work.b = mask.block_size();
  work.total_blocks = mask.num_blocks();

  StaticGrid best;
  std::uint64_t bestCycles = UINT64_MAX;
  const std::size_t maxQk =
      std::min({machine.tiles, mask.block_cols(), splits.max_blocks.size()});
  for (std::size_t qk = 1; qk <= maxQk; ++qk) {
    work.qk = qk;
    work.max_tile_blocks = splits.max_blocks[qk - 1];
    const std::size_t maxQn = std::min(n, machine.tiles / qk);
    for (std::size_t qn = 1; qn <= maxQn; ++qn) {
      work.max_n_slice = last_heavy_size(n, qn);
      CycleTally tally(machine);
      static_schedule(tally, work, dtype, machine);
      if (tally.total < bestCycles) {
        bestCycles = tally.total;
        best = {qk, qn};
      }
    }
  }
  return best;
}

StaticPlan build_static_plan(const BlockMask &mask, std::size_t qk,
                             std::size_t qn, std::size_t n,
                             const MachineConfig &machine) {
  if (qk == 0 || qn == 0 || qk * qn > machine.tiles) {
    throw Error("static grid " + std::to_string(qk) + "x" +
                std::to_string(qn) + " does not fit on " +
                std::to_string(machine.tiles) + " tiles");
  }
  if (qn > n) {
    throw Error("cannot split n = " + std::to_string(n) + " into " +
                std::to_string(qn) + " slices");
  }
  StaticPlan plan;
  plan.m = mask.m();
  plan.k = mask.k();
  plan.n = n;
  plan.b = mask.block_size();
  plan.qk = qk;
  plan.qn = qn;
  plan.k_boundaries = balanced_k_splits(mask, qk);

  plan.n_boundaries.assign(1, 0);
  for (const auto size : partition_sizes(n, qn)) {
    plan.n_boundaries.push_back(plan.n_boundaries.back() + size);
  }

  plan.tile_of.resize(qk * qn);
  std::iota(plan.tile_of.begin(), plan.tile_of.end(), std::size_t{0});

  // Block column -> owning k-partition.
  std::vector<std::uint32_t> owner(mask.block_cols());
  for (std::size_t pk = 0; pk < qk; ++pk) {
    for (std::size_t c = plan.k_boundaries[pk]; c < plan.k_boundaries[pk + 1];
         ++c) {
      owner[c] = static_cast<std::uint32_t>(pk);
    }
  }
  plan.partition_blocks.resize(qk);
  const auto coords = mask.coords();
  for (std::size_t i = 0; i < coords.size(); ++i) {
    plan.partition_blocks[owner[coords[i].col]].push_back(
        static_cast<std::uint32_t>(i));
  }
  plan.mask_fingerprint = mask.fingerprint();
  return plan;
}

std::vector<std::vector<Real>> reorder_values(const BlockSparseMatrix &s,
                                              const StaticPlan &plan) {
  if (s.mask().fingerprint() != plan.mask_fingerprint ||
      s.mask().m() != plan.m || s.mask().k() != plan.k ||
      s.mask().block_size() != plan.b) {
    throw Error("static plan was built for a different sparsity pattern");
  }
  const std::size_t area = plan.b * plan.b;
  std::vector<std::vector<Real>> slices(plan.qk);
  for (std::size_t pk = 0; pk < plan.qk; ++pk) {
    auto &slice = slices[pk];
    slice.reserve(plan.partition_blocks[pk].size() * area);
    for (const auto idx : plan.partition_blocks[pk]) {
      const auto blk = s.block(idx);
      slice.insert(slice.end(), blk.begin(), blk.end());
    }
  }
  return slices;
}

} // namespace tilespmm
