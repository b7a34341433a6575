// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tilespmm/machine.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace tilespmm {

/// ceil(macs / macs_per_cycle(dtype, b)).
std::uint64_t compute_cycles(std::uint64_t macs, std::size_t b, DataType dtype,
                             const MachineConfig &machine);

/// ceil(bytes / exchange_bytes_per_cycle), aggregate over the whole fabric.
std::uint64_t exchange_cycles(std::uint64_t bytes, const MachineConfig &machine);

/// ceil(adds / adds_per_cycle(dtype)).
std::uint64_t reduce_cycles(std::uint64_t adds, DataType dtype,
                            const MachineConfig &machine);

enum class PhaseKind { exchange, compute, sync, reduce };

std::string_view to_string(PhaseKind kind);

struct Phase {
  PhaseKind kind;
  std::uint64_t cycles = 0;
  std::uint64_t bytes_moved = 0;
  std::uint64_t macs_done = 0;
};

/// Per-phase accounting of one BSP program. Each phase lasts as long as its
/// slowest tile.
struct ExecutionTrace {
  std::vector<Phase> phases;
  std::size_t propagation_steps = 0;
  std::vector<std::uint64_t> per_tile_macs;
  std::uint64_t total_cycles = 0;
  double achieved_flops = 0;
  /// Largest resident footprint of any tile, for the memory audit.
  std::size_t max_tile_bytes = 0;

  void exchange(std::uint64_t bytes, const MachineConfig &machine);
  void sync(const MachineConfig &machine);
  void compute(std::uint64_t slowest_tile_cycles, std::uint64_t macs);
  void reduce(std::uint64_t slowest_tile_adds, DataType dtype,
              const MachineConfig &machine);

  /// FLOP/s from the useful (non-zero) FLOPs over the modeled runtime.
  void finish(double useful_flops, const MachineConfig &machine);

  std::size_t count(PhaseKind kind) const;
  std::uint64_t cycles_of(PhaseKind kind) const;
};

/// Near-equal split: the first dim % q parts are one larger. Parts may be
/// empty when q > dim.
std::vector<std::size_t> balanced_sizes(std::size_t dim, std::size_t q);

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) {
  return (a + b - 1) / b;
}

} // namespace tilespmm
