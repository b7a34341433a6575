// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tilespmm/cost_model.hpp"
#include "tilespmm/dynamic_plan.hpp"
#include "tilespmm/error.hpp"
#include "tilespmm/machine.hpp"
#include "tilespmm/matrix.hpp"
#include "tilespmm/static_plan.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace tilespmm {

/// Counts tile-local reads. A violation is a read of data that was not
/// delivered by an earlier superstep.
struct AccessAudit {
  std::size_t reads = 0;
  std::size_t violations = 0;
};

/// One buffer in a tile's local memory, stamped with the superstep that
/// delivered it. Reading in the same superstep that wrote it (or before any
/// delivery) is a BSP violation.
template <typename T> class TileSlot {
public:
  void deliver(T value, std::size_t superstep) {
    value_ = std::move(value);
    superstep_ = superstep;
  }

  bool present() const { return value_.has_value(); }

  const T &read(std::size_t superstep, AccessAudit &audit) const {
    ++audit.reads;
    if (!value_) {
      ++audit.violations;
      throw Error("tile read of data that was never delivered");
    }
    if (superstep_ >= superstep) {
      ++audit.violations;
    }
    return *value_;
  }

  /// Mutable access for the owning tile after an audited read.
  T &local(std::size_t superstep, AccessAudit &audit) {
    read(superstep, audit);
    return *value_;
  }

  std::size_t superstep() const { return superstep_; }

private:
  std::optional<T> value_;
  std::size_t superstep_ = 0;
};

struct SpmmResult {
  DenseMatrix y;
  ExecutionTrace trace;
  AccessAudit audit;
};

/// Simulates a static plan tile by tile: X k-slices are exchanged, every
/// tile multiplies its pre-placed blocks, and partials are tree-reduced over
/// the k-partitions.
SpmmResult run_static(const StaticPlan &plan, const BlockSparseMatrix &s,
                      const DenseMatrix &x, const MachineConfig &machine,
                      DataType dtype);

/// Cost-only trace of a static plan; equals run_static's trace.
ExecutionTrace trace_static(const StaticPlan &plan,
                            const MachineConfig &machine, DataType dtype);

/// Simulates a dynamic plan: distribution compute, then propagation steps
/// that shift every bucket one place backward in nested order until each
/// entry has met its home partition, then the reduction over k.
SpmmResult run_dynamic(const DynamicPlan &plan, const BucketSet &buckets,
                       const DenseMatrix &x, const MachineConfig &machine,
                       DataType dtype);

/// Per-bucket counts that fully determine a dynamic run's cost.
struct BucketOccupancy {
  std::size_t num_buckets = 0;
  std::size_t steps = 0;                // propagation steps needed
  std::vector<std::uint64_t> resident;  // entries stored in bucket h
  std::vector<std::uint64_t> home_count; // entries whose home is h
  std::vector<std::uint64_t> arrivals;  // [home * (steps + 1) + delay]
  std::uint64_t total_blocks = 0;
};

BucketOccupancy summarize_buckets(const DynamicPlan &plan,
                                  const BucketSet &buckets);

/// Cost-only trace of a dynamic run; accepts metadata-only bucket sets and
/// equals run_dynamic's trace.
ExecutionTrace trace_dynamic(const DynamicPlan &plan, const BucketSet &buckets,
                             const MachineConfig &machine, DataType dtype);
ExecutionTrace trace_dynamic(const DynamicPlan &plan,
                             const BucketOccupancy &occupancy,
                             const MachineConfig &machine, DataType dtype);

/// Cost-only trace of a dense m x k x n matmul on the cheapest dense grid.
ExecutionTrace run_dense_baseline(std::size_t m, std::size_t k, std::size_t n,
                                  const MachineConfig &machine,
                                  DataType dtype);

} // namespace tilespmm
