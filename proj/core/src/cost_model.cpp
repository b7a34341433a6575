// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/cost_model.hpp"

#include "tilespmm/error.hpp"

#include <algorithm>
#include <numeric>

namespace tilespmm {

std::uint64_t compute_cycles(std::uint64_t macs, std::size_t b, DataType dtype,
                             const MachineConfig &machine) {
  const auto rate = machine.macs_per_cycle(dtype, b);
  return macs == 0 ? 0 : ceil_div(macs, rate);
}

std::uint64_t exchange_cycles(std::uint64_t bytes,
                              const MachineConfig &machine) {
  return bytes == 0 ? 0 : ceil_div(bytes, machine.exchange_bytes_per_cycle);
}

std::uint64_t reduce_cycles(std::uint64_t adds, DataType dtype,
                            const MachineConfig &machine) {
  return adds == 0 ? 0 : ceil_div(adds, machine.adds_per_cycle(dtype));
}

std::string_view to_string(PhaseKind kind) {
  switch (kind) {
  case PhaseKind::exchange:
    return "exchange";
  case PhaseKind::compute:
    return "compute";
  case PhaseKind::sync:
    return "sync";
  case PhaseKind::reduce:
    return "reduce";
  }
  return "?";
}

void ExecutionTrace::exchange(std::uint64_t bytes,
                              const MachineConfig &machine) {
  phases.push_back({PhaseKind::exchange, exchange_cycles(bytes, machine),
                    bytes, 0});
}

void ExecutionTrace::sync(const MachineConfig &machine) {
  phases.push_back({PhaseKind::sync, machine.sync_cycles, 0, 0});
}

void ExecutionTrace::compute(std::uint64_t slowest_tile_cycles,
                             std::uint64_t macs) {
  phases.push_back({PhaseKind::compute, slowest_tile_cycles, 0, macs});
}

void ExecutionTrace::reduce(std::uint64_t slowest_tile_adds, DataType dtype,
                            const MachineConfig &machine) {
  phases.push_back({PhaseKind::reduce,
                    reduce_cycles(slowest_tile_adds, dtype, machine), 0, 0});
}

void ExecutionTrace::finish(double useful_flops,
                            const MachineConfig &machine) {
  total_cycles = 0;
  for (const auto &p : phases) {
    total_cycles += p.cycles;
  }
  if (total_cycles == 0) {
    throw Error("execution trace has zero cycles");
  }
  achieved_flops =
      useful_flops / (static_cast<double>(total_cycles) / machine.clock_hz);
}

std::size_t ExecutionTrace::count(PhaseKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(phases.begin(), phases.end(),
                    [kind](const Phase &p) { return p.kind == kind; }));
}

std::uint64_t ExecutionTrace::cycles_of(PhaseKind kind) const {
  std::uint64_t sum = 0;
  for (const auto &p : phases) {
    if (p.kind == kind) {
      sum += p.cycles;
    }
  }
  return sum;
}

std::vector<std::size_t> balanced_sizes(std::size_t dim, std::size_t q) {
  if (q == 0) {
    throw Error("cannot split " + std::to_string(dim) + " into zero parts");
  }
  std::vector<std::size_t> sizes(q, dim / q);
  for (std::size_t i = 0; i < dim % q; ++i) {
    ++sizes[i];
  }
  return sizes;
}

} // namespace tilespmm
