// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/dynamic_plan.hpp"

#include "tilespmm/cost_model.hpp"
#include "tilespmm/error.hpp"
#include "tilespmm/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tilespmm {

std::vector<std::size_t> partition_sizes(std::size_t dim, std::size_t q) {
  if (q == 0 || q > dim) {
    throw Error("cannot split a dimension of " + std::to_string(dim) +
                " into " + std::to_string(q) + " partitions");
  }
  std::vector<std::size_t> sizes(q, dim / q);
  sizes.back() = dim - (q - 1) * (dim / q);
  return sizes;
}

std::size_t part_of(std::size_t pos, std::size_t dim, std::size_t q) {
  return std::min(pos / (dim / q), q - 1);
}

PartitionIndex DynamicPlan::partition_of_tile(std::size_t tile) const {
  return {tile / (qk * qn), (tile / qn) % qk, tile % qn};
}

std::size_t DynamicPlan::row_offset(std::size_t pm) const {
  return pm * part_m.front();
}

std::size_t DynamicPlan::col_offset(std::size_t pk) const {
  return pk * part_k.front();
}

std::size_t DynamicPlan::n_offset(std::size_t pn) const {
  return pn * part_n.front();
}

std::uint64_t DynamicPlan::bucket_bytes(DataType dtype,
                                        const MachineConfig &machine) const {
  return std::uint64_t{bucket_value_capacity} *
             machine.bytes_per_element(dtype) +
         std::uint64_t{bucket_meta_capacity} * kMetaEntryBytes;
}

std::size_t bucket_value_capacity(std::size_t m, std::size_t k, std::size_t b,
                                  double d_max, std::size_t qm,
                                  std::size_t qk) {
  const double even = static_cast<double>(m) * static_cast<double>(k) *
                      d_max / static_cast<double>(qm * qk);
  // Absorb floating-point noise when d_max is a ratio of the block count.
  const double nearest = std::round(even);
  const auto elements = static_cast<std::size_t>(
      std::abs(even - nearest) <= 1e-9 * std::max(1.0, even) ? nearest
                                                             : std::ceil(even));
  const std::size_t area = b * b;
  return std::max<std::size_t>(1, (elements + area - 1) / area) * area;
}

DynamicPlan make_dynamic_plan(std::size_t m, std::size_t k, std::size_t n,
                              std::size_t b, double d_max, std::size_t qm,
                              std::size_t qk, std::size_t qn,
                              const MachineConfig &machine) {
  if (!(d_max > 0.0 && d_max <= 1.0)) {
    throw Error("maximum density must lie in (0, 1]");
  }
  if (!is_supported_block_size(b) || m % b != 0 || k % b != 0) {
    throw Error("block size " + std::to_string(b) +
                " must be one of 1, 4, 8, 16 and divide m and k");
  }
  if (qm * qk * qn > machine.tiles) {
    throw Error("dynamic grid needs more tiles than the machine has");
  }
  DynamicPlan plan;
  plan.m = m;
  plan.k = k;
  plan.n = n;
  plan.b = b;
  plan.d_max = d_max;
  plan.qm = qm;
  plan.qk = qk;
  plan.qn = qn;
  plan.part_m = partition_sizes(m / b, qm);
  plan.part_k = partition_sizes(k / b, qk);
  plan.part_n = partition_sizes(n, qn);
  plan.headroom = machine.headroom;
  plan.bucket_value_capacity = bucket_value_capacity(m, k, b, d_max, qm, qk);
  plan.bucket_meta_capacity = static_cast<std::size_t>(std::ceil(
      machine.headroom * static_cast<double>(plan.bucket_block_capacity())));
  return plan;
}

DynamicPlan plan_dynamic(std::size_t m, std::size_t k, std::size_t n,
                         std::size_t b, double d_max,
                         const MachineConfig &machine, DataType dtype) {
  if (!is_supported_block_size(b) || m % b != 0 || k % b != 0 || n == 0) {
    throw Error("invalid shape for a dynamic plan");
  }
  const std::size_t rows = m / b;
  const std::size_t cols = k / b;
  const std::size_t tiles = machine.tiles;
  const std::size_t area = b * b;

  DynamicUniformWork work;
  work.m = m;
  work.k = k;
  work.n = n;
  work.b = b;

  std::uint64_t bestCycles = UINT64_MAX;
  std::size_t bestQm = 1;
  std::size_t bestQk = 1;
  std::size_t bestQn = 1;
  for (std::size_t qm = 1; qm <= std::min(rows, tiles); ++qm) {
    work.qm = qm;
    work.max_m_slice = (rows - (qm - 1) * (rows / qm)) * b;
    for (std::size_t qk = 1; qk <= std::min(cols, tiles / qm); ++qk) {
      work.qk = qk;
      const std::size_t values = bucket_value_capacity(m, k, b, d_max, qm, qk);
      const auto meta = static_cast<std::size_t>(std::ceil(
          machine.headroom * static_cast<double>(values / area)));
      work.bucket_blocks = values / area;
      work.bucket_bytes = std::uint64_t{values} * machine.bytes_per_element(dtype) +
                          std::uint64_t{meta} * kMetaEntryBytes;
      for (std::size_t qn = 1; qn <= std::min(n, tiles / (qm * qk)); ++qn) {
        work.qn = qn;
        work.max_n_slice = n - (qn - 1) * (n / qn);
        CycleTally tally(machine);
        dynamic_uniform_schedule(tally, work, dtype, machine);
        if (tally.total < bestCycles) {
          bestCycles = tally.total;
          bestQm = qm;
          bestQk = qk;
          bestQn = qn;
        }
      }
    }
  }
  return make_dynamic_plan(m, k, n, b, d_max, bestQm, bestQk, bestQn, machine);
}

std::size_t bucket_distance(const PartitionIndex &from,
                            const PartitionIndex &to,
                            const DynamicPlan &plan) {
  const std::size_t total = plan.total_partitions();
  const std::size_t a = plan.tile_of(from);
  const std::size_t z = plan.tile_of(to);
  return (z + total - a) % total;
}

BucketSet encode_buckets(const BlockMask &mask, std::span<const Real> values,
                         const DynamicPlan &plan) {
  if (mask.m() != plan.m || mask.k() != plan.k ||
      mask.block_size() != plan.b) {
    throw Error("sparsity pattern shape does not match the dynamic plan");
  }
  if (density(mask) > plan.d_max * (1 + 1e-12)) {
    throw Error("pattern density " + std::to_string(density(mask)) +
                " exceeds the planned maximum " + std::to_string(plan.d_max));
  }
  const std::size_t area = plan.b * plan.b;
  const bool withValues = !values.empty();
  if (withValues && values.size() != mask.num_blocks() * area) {
    throw Error("value count does not match the sparsity pattern");
  }

  const std::size_t numBuckets = plan.num_buckets();
  const std::size_t capacity = plan.bucket_block_capacity();
  const std::size_t rows = mask.block_rows();
  const std::size_t cols = mask.block_cols();

  BucketSet set;
  set.has_values = withValues;
  set.buckets.resize(numBuckets);
  std::set<std::size_t> open;
  for (std::size_t h = 0; h < numBuckets; ++h) {
    open.insert(open.end(), h);
  }

  const auto coords = mask.coords();
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto c = coords[i];
    const std::size_t pm = part_of(c.row, rows, plan.qm);
    const std::size_t pk = part_of(c.col, cols, plan.qk);
    const std::size_t home = plan.bucket_of(pm, pk);

    std::size_t target = home;
    if (set.buckets[home].meta.size() >= capacity) {
      if (open.empty()) {
        throw Error("dynamic buckets are out of capacity; the pattern is "
                    "denser than the plan allows");
      }
      auto it = open.upper_bound(home);
      target = it == open.end() ? *open.begin() : *it;
      ++set.spilled_blocks;
    }

    auto &bucket = set.buckets[target];
    MetaInfoEntry entry;
    entry.home_pm = static_cast<std::uint32_t>(pm);
    entry.home_pk = static_cast<std::uint32_t>(pk);
    entry.block_row = static_cast<std::uint32_t>(c.row - plan.row_offset(pm));
    entry.block_col = static_cast<std::uint32_t>(c.col - plan.col_offset(pk));
    entry.value_offset = static_cast<std::uint32_t>(bucket.meta.size());
    bucket.meta.push_back(entry);
    if (withValues) {
      const auto src = values.subspan(i * area, area);
      bucket.values.insert(bucket.values.end(), src.begin(), src.end());
    }
    if (bucket.meta.size() >= capacity) {
      open.erase(target);
    }
  }
  return set;
}

} // namespace tilespmm
