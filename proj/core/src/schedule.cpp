// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/schedule.hpp"

#include <algorithm>

namespace tilespmm {

std::uint64_t sum_cycles(const ExecutionTrace &trace) {
  std::uint64_t total = 0;
  for (const auto &p : trace.phases) {
    total += p.cycles;
  }
  return total;
}

ExecutionTrace static_schedule(const StaticWork &work, DataType dtype,
                               const MachineConfig &machine) {
  ExecutionTrace trace;
  static_schedule(trace, work, dtype, machine);
  trace.total_cycles = sum_cycles(trace);
  return trace;
}

ExecutionTrace dense_schedule(std::size_t m, std::size_t k, std::size_t n,
                              const DenseGrid &grid, DataType dtype,
                              const MachineConfig &machine) {
  ExecutionTrace trace;
  dense_schedule(trace, m, k, n, grid, dtype, machine);
  const std::uint64_t bytes = machine.bytes_per_element(dtype);
  const std::uint64_t rows = ceil_div(m, grid.qm);
  const std::uint64_t depth = ceil_div(k, grid.qk);
  const std::uint64_t cols = ceil_div(n, grid.qn);
  trace.max_tile_bytes = (rows * depth + depth * cols + rows * cols) * bytes;
  trace.total_cycles = sum_cycles(trace);
  return trace;
}

DenseGrid choose_dense_grid(std::size_t m, std::size_t k, std::size_t n,
                            DataType dtype, const MachineConfig &machine) {
  DenseGrid best;
  std::uint64_t bestCycles = UINT64_MAX;
  const std::size_t tiles = machine.tiles;
  for (std::size_t qm = 1; qm <= std::min(m, tiles); ++qm) {
    for (std::size_t qk = 1; qk <= std::min(k, tiles / qm); ++qk) {
      for (std::size_t qn = 1; qn <= std::min(n, tiles / (qm * qk)); ++qn) {
        CycleTally tally(machine);
        dense_schedule(tally, m, k, n, {qm, qk, qn}, dtype, machine);
        if (tally.total < bestCycles) {
          bestCycles = tally.total;
          best = {qm, qk, qn};
        }
      }
    }
  }
  return best;
}

} // namespace tilespmm
