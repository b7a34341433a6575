// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace tilespmm {

enum class DataType { fp16, fp32 };

std::string_view to_string(DataType dtype);
DataType parse_data_type(std::string_view text);

/// Parameters of the simulated tile machine and its cost model. Defaults
/// describe a 1472-tile part with 625 KiB per tile clocked at 1.85 GHz;
/// the throughput figures are calibration knobs.
struct MachineConfig {
  std::size_t tiles = 1472;
  std::size_t tile_memory_bytes = 625 * 1024;
  double clock_hz = 1.85e9;
  std::uint64_t exchange_bytes_per_cycle = 5888;
  std::uint64_t sync_cycles = 50;
  // Per-tile MACs/cycle indexed [dtype][block-size slot], slots b = 1, 4, 8, 16.
  std::array<std::array<std::uint64_t, 4>, 2> macs_per_cycle_table{
      {{16, 32, 48, 64}, {8, 16, 24, 32}}};
  std::uint64_t meta_overhead_cycles = 2;
  double headroom = 1.5;

  std::uint64_t macs_per_cycle(DataType dtype, std::size_t b) const;
  std::size_t bytes_per_element(DataType dtype) const;

  /// Rate used for element-wise additions in output reductions.
  std::uint64_t adds_per_cycle(DataType dtype) const {
    return macs_per_cycle(dtype, 1);
  }

  /// Dense matmuls run at the widest block rate.
  std::uint64_t dense_macs_per_cycle(DataType dtype) const {
    return macs_per_cycle(dtype, 16);
  }

  /// tiles * dense rate * 2 FLOP/MAC * clock.
  double peak_flops(DataType dtype) const;

  /// Throws Error when any invariant of the configuration is broken.
  void validate() const;
};

/// Reads "key = value" lines; '#' starts a comment. Unknown keys are errors,
/// missing keys keep their defaults.
MachineConfig parse_machine_config(std::istream &in);
MachineConfig load_machine_config(const std::filesystem::path &path);
void write_machine_config(std::ostream &out, const MachineConfig &machine);

} // namespace tilespmm
