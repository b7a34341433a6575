// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tilespmm/machine.hpp"
#include "tilespmm/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tilespmm {

/// Compile-time layout for a fixed sparsity pattern: the k dimension is cut
/// at block-column boundaries into qk partitions of roughly equal non-zero
/// count, n into qn slices, and every (k-partition, n-slice) pair owns one
/// tile.
struct StaticPlan {
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t b = 1;
  std::size_t qk = 1;
  std::size_t qn = 1;
  /// qk + 1 block-column indices from 0 to k/b.
  std::vector<std::size_t> k_boundaries;
  /// qn + 1 column indices from 0 to n.
  std::vector<std::size_t> n_boundaries;
  /// Tile id of partition (pk, pn), stored at pk * qn + pn.
  std::vector<std::size_t> tile_of;
  /// Mask indices owned by each k-partition, in mask order.
  std::vector<std::vector<std::uint32_t>> partition_blocks;
  std::uint64_t mask_fingerprint = 0;

  std::size_t tile(std::size_t pk, std::size_t pn) const {
    return tile_of[pk * qn + pn];
  }
  std::size_t n_slice(std::size_t pn) const {
    return n_boundaries[pn + 1] - n_boundaries[pn];
  }
  std::size_t k_width(std::size_t pk) const {
    return (k_boundaries[pk + 1] - k_boundaries[pk]) * b;
  }
  std::size_t max_partition_blocks() const;
  std::size_t max_n_slice() const;
};

struct StaticGrid {
  std::size_t qk = 1;
  std::size_t qn = 1;
  friend bool operator==(const StaticGrid &, const StaticGrid &) = default;
};

/// Greedy prefix-sum split of the block columns into exactly qk ranges.
/// A range closes once it holds ceil(total/qk) blocks, or when the columns
/// left are just enough to give every remaining range one column.
std::vector<std::size_t> balanced_k_splits(const BlockMask &mask,
                                           std::size_t qk);
std::vector<std::size_t>
balanced_k_splits(std::span<const std::size_t> column_counts, std::size_t qk);

/// Largest k-partition block count of balanced_k_splits for every qk up to
/// min(tiles, k/b). Shared by grid searches over many batch sizes.
struct StaticSplitTable {
  std::vector<std::size_t> max_blocks; // entry qk-1

  static StaticSplitTable build(const BlockMask &mask, std::size_t tiles);
};

/// Exhaustive search over (qk, qn) with qk*qn <= tiles, qk <= k/b, qn <= n,
/// minimising modeled cycles; ties prefer smaller qk, then smaller qn.
StaticGrid choose_static_grid(const BlockMask &mask, std::size_t n,
                              const MachineConfig &machine,
                              DataType dtype = DataType::fp16);
StaticGrid choose_static_grid(const BlockMask &mask,
                              const StaticSplitTable &splits, std::size_t n,
                              const MachineConfig &machine, DataType dtype);

StaticPlan build_static_plan(const BlockMask &mask, std::size_t qk,
                             std::size_t qn, std::size_t n,
                             const MachineConfig &machine);

/// Value slices in k-partition order, each listing the partition's blocks in
/// plan order. Every tile (pk, *) is loaded with slice pk, so the slices
/// together are a block permutation of s.values(). Fails if s was not built
/// on the plan's mask.
std::vector<std::vector<Real>> reorder_values(const BlockSparseMatrix &s,
                                              const StaticPlan &plan);

} // namespace tilespmm
