// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tilespmm/machine.hpp"
#include "tilespmm/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tilespmm {

/// q-1 parts of floor(dim/q) and a final part holding the rest.
std::vector<std::size_t> partition_sizes(std::size_t dim, std::size_t q);

/// Index of the part containing position `pos` for a partition_sizes split.
std::size_t part_of(std::size_t pos, std::size_t dim, std::size_t q);

struct PartitionIndex {
  std::size_t pm = 0;
  std::size_t pk = 0;
  std::size_t pn = 0;
  friend bool operator==(const PartitionIndex &,
                         const PartitionIndex &) = default;
};

/// Pattern-independent plan for a dynamically sparse operand of density at
/// most d_max. m and k are partitioned in block units, n in columns. One
/// bucket exists per (pm, pk) pair; bucket h = pm*qk + pk.
struct DynamicPlan {
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t b = 1;
  double d_max = 1;
  std::size_t qm = 1;
  std::size_t qk = 1;
  std::size_t qn = 1;
  std::vector<std::size_t> part_m; // block rows per m-partition
  std::vector<std::size_t> part_k; // block columns per k-partition
  std::vector<std::size_t> part_n; // columns per n-partition
  /// Non-zero elements a bucket can hold; a whole number of b*b blocks.
  std::size_t bucket_value_capacity = 0;
  std::size_t bucket_meta_capacity = 0;
  double headroom = 1.5;

  std::size_t num_buckets() const { return qm * qk; }
  std::size_t total_partitions() const { return qm * qk * qn; }
  std::size_t bucket_block_capacity() const {
    return bucket_value_capacity / (b * b);
  }
  std::size_t bucket_of(std::size_t pm, std::size_t pk) const {
    return pm * qk + pk;
  }
  /// Nested order: n innermost, then k, then m.
  std::size_t tile_of(const PartitionIndex &p) const {
    return (p.pm * qk + p.pk) * qn + p.pn;
  }
  PartitionIndex partition_of_tile(std::size_t tile) const;

  std::size_t row_offset(std::size_t pm) const; // in block rows
  std::size_t col_offset(std::size_t pk) const; // in block columns
  std::size_t n_offset(std::size_t pn) const;

  /// Bytes of one full-capacity bucket (values plus metaInfo).
  std::uint64_t bucket_bytes(DataType dtype,
                             const MachineConfig &machine) const;
};

/// Bucket capacity for a grid, following the even-spread rule
/// ceil(m*k*d_max / (qm*qk)) rounded up to whole blocks.
std::size_t bucket_value_capacity(std::size_t m, std::size_t k, std::size_t b,
                                  double d_max, std::size_t qm,
                                  std::size_t qk);

DynamicPlan make_dynamic_plan(std::size_t m, std::size_t k, std::size_t n,
                              std::size_t b, double d_max, std::size_t qm,
                              std::size_t qk, std::size_t qn,
                              const MachineConfig &machine);

/// Exhaustive search over (qm, qk, qn) with qm*qk*qn <= tiles, scoring each
/// grid as if the non-zeros were spread uniformly at d_max. Ties go to the
/// lexicographically smallest grid.
DynamicPlan plan_dynamic(std::size_t m, std::size_t k, std::size_t n,
                         std::size_t b, double d_max,
                         const MachineConfig &machine,
                         DataType dtype = DataType::fp16);

/// Forward cyclic steps from `from` to `to` in nested order.
std::size_t bucket_distance(const PartitionIndex &from,
                            const PartitionIndex &to, const DynamicPlan &plan);

struct MetaInfoEntry {
  std::uint32_t home_pm = 0;
  std::uint32_t home_pk = 0;
  std::uint32_t block_row = 0; // within the home partition
  std::uint32_t block_col = 0; // within the home partition
  std::uint32_t value_offset = 0; // block index into the bucket's values
  friend bool operator==(const MetaInfoEntry &,
                         const MetaInfoEntry &) = default;
};

struct Bucket {
  std::vector<MetaInfoEntry> meta;
  std::vector<Real> values; // empty for a metadata-only encoding
};

struct BucketSet {
  std::vector<Bucket> buckets; // indexed by DynamicPlan::bucket_of
  std::size_t spilled_blocks = 0;
  bool has_values = false;
};

/// Encodes the pattern into buckets. Blocks go to their home bucket in mask
/// order; a block whose home is full takes the nearest bucket forward in
/// nested order that still has room. `values` may be empty to produce a
/// metadata-only encoding (used for cost estimation).
BucketSet encode_buckets(const BlockMask &mask, std::span<const Real> values,
                         const DynamicPlan &plan);

} // namespace tilespmm
