// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tilespmm/cost_model.hpp"
#include "tilespmm/machine.hpp"

#include <cstddef>
#include <cstdint>

namespace tilespmm {

// Analytic phase schedules. Planners rank candidate grids with these and the
// simulated runs are checked against them in the tests. Each schedule is
// written once against a recorder, which is either an ExecutionTrace or a
// CycleTally when only the total matters.

/// Recorder that only sums cycles.
struct CycleTally {
  const MachineConfig *machine = nullptr;
  std::uint64_t total = 0;

  explicit CycleTally(const MachineConfig &m) : machine(&m) {}
  void exchange(std::uint64_t bytes, const MachineConfig &m) {
    total += exchange_cycles(bytes, m);
  }
  void sync(const MachineConfig &m) { total += m.sync_cycles; }
  void compute(std::uint64_t cycles, std::uint64_t) { total += cycles; }
  void reduce(std::uint64_t adds, DataType dtype, const MachineConfig &m) {
    total += reduce_cycles(adds, dtype, m);
  }
};

/// Size in bytes of one metaInfo entry in exchange and memory accounting.
inline constexpr std::uint64_t kMetaEntryBytes = 8;

struct StaticWork {
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t b = 1;
  std::size_t qk = 1;
  std::uint64_t max_tile_blocks = 0;
  std::size_t max_n_slice = 0;
  std::uint64_t total_blocks = 0;
};

/// exchange X k-slices, sync, compute, then (qk > 1) sync, exchange
/// partials, sync, tree-reduce.
template <typename Recorder>
void static_schedule(Recorder &rec, const StaticWork &work, DataType dtype,
                     const MachineConfig &machine) {
  const std::uint64_t bytes = machine.bytes_per_element(dtype);
  const std::uint64_t area = work.b * work.b;
  rec.exchange(std::uint64_t{work.k} * work.n * bytes, machine);
  rec.sync(machine);
  rec.compute(compute_cycles(work.max_tile_blocks * area * work.max_n_slice,
                             work.b, dtype, machine),
              work.total_blocks * area * work.n);
  if (work.qk > 1) {
    rec.sync(machine);
    rec.exchange((work.qk - 1) * std::uint64_t{work.m} * work.n * bytes,
                 machine);
    rec.sync(machine);
    rec.reduce(ceil_div(work.m, work.qk) * work.max_n_slice * (work.qk - 1),
               dtype, machine);
  }
}

struct DenseGrid {
  std::size_t qm = 1;
  std::size_t qk = 1;
  std::size_t qn = 1;
  friend bool operator==(const DenseGrid &, const DenseGrid &) = default;
};

/// Dense matmul over a near-even (qm, qk, qn) grid at the widest MAC rate.
template <typename Recorder>
void dense_schedule(Recorder &rec, std::size_t m, std::size_t k, std::size_t n,
                    const DenseGrid &grid, DataType dtype,
                    const MachineConfig &machine) {
  const std::uint64_t bytes = machine.bytes_per_element(dtype);
  const std::uint64_t rows = ceil_div(m, grid.qm);
  const std::uint64_t depth = ceil_div(k, grid.qk);
  const std::uint64_t cols = ceil_div(n, grid.qn);
  rec.exchange(grid.qm * std::uint64_t{k} * n * bytes, machine);
  rec.sync(machine);
  rec.compute(
      ceil_div(rows * depth * cols, machine.dense_macs_per_cycle(dtype)),
      std::uint64_t{m} * k * n);
  if (grid.qk > 1) {
    rec.sync(machine);
    rec.exchange((grid.qk - 1) * std::uint64_t{m} * n * bytes, machine);
    rec.sync(machine);
    rec.reduce(ceil_div(rows, grid.qk) * cols * (grid.qk - 1), dtype, machine);
  }
}

/// Dynamic plan scored as if every bucket were exactly full of blocks that
/// live in its own partition (no propagation).
struct DynamicUniformWork {
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t b = 1;
  std::size_t qm = 1;
  std::size_t qk = 1;
  std::size_t qn = 1;
  std::uint64_t bucket_blocks = 0;
  std::uint64_t bucket_bytes = 0;
  std::size_t max_m_slice = 0; // elements
  std::size_t max_n_slice = 0;
};

template <typename Recorder>
void dynamic_uniform_schedule(Recorder &rec, const DynamicUniformWork &work,
                              DataType dtype, const MachineConfig &machine) {
  const std::uint64_t bytes = machine.bytes_per_element(dtype);
  const std::uint64_t area = work.b * work.b;
  const std::uint64_t buckets = work.qm * work.qk;
  rec.exchange(work.qm * std::uint64_t{work.k} * work.n * bytes +
                   (work.qn - 1) * buckets * work.bucket_bytes,
               machine);
  rec.sync(machine);
  rec.compute(compute_cycles(work.bucket_blocks * area * work.max_n_slice,
                             work.b, dtype, machine) +
                  work.bucket_blocks * machine.meta_overhead_cycles,
              buckets * work.bucket_blocks * area * work.n);
  rec.sync(machine);
  if (work.qk > 1) {
    rec.exchange((work.qk - 1) * std::uint64_t{work.m} * work.n * bytes,
                 machine);
    rec.sync(machine);
    rec.reduce(ceil_div(work.max_m_slice, work.qk) * work.max_n_slice *
                   (work.qk - 1),
               dtype, machine);
  }
}

ExecutionTrace static_schedule(const StaticWork &work, DataType dtype,
                               const MachineConfig &machine);

ExecutionTrace dense_schedule(std::size_t m, std::size_t k, std::size_t n,
                              const DenseGrid &grid, DataType dtype,
                              const MachineConfig &machine);

/// Cheapest dense grid over all (qm, qk, qn) with qm*qk*qn <= tiles; ties
/// go to the lexicographically smallest grid.
DenseGrid choose_dense_grid(std::size_t m, std::size_t k, std::size_t n,
                            DataType dtype, const MachineConfig &machine);

std::uint64_t sum_cycles(const ExecutionTrace &trace);

} // namespace tilespmm
