// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tilespmm/machine.hpp"
#include "tilespmm/records.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace tilespmm {

struct SweepConfig {
  std::vector<std::size_t> m_list{256, 512, 1024, 2048, 4096, 8192}; // m = k
  std::vector<std::size_t> n_list{4, 16, 64, 256, 1024, 4096, 16384, 65536};
  std::vector<std::size_t> b_list{1, 4, 8, 16};
  std::vector<double> d_list{1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32};
  std::vector<DataType> dtype_list{DataType::fp16, DataType::fp32};
  std::vector<Mode> sparse_modes{Mode::static_sparse, Mode::dynamic_sparse};
  std::uint64_t seed = 1;
  /// Worker threads; output is identical for any value.
  std::size_t jobs = 1;

  void validate() const;
};

/// Rows run_sweep emits (skip markers included): per (m, dtype, n) one dense
/// row plus one row per sparse mode for each b dividing m and each d.
std::size_t sweep_row_count(const SweepConfig &config);

/// Rows in canonical order: for m, dtype, n: the dense row, then for b, d
/// the sparse modes in config order. Sparse rows whose tile footprint
/// exceeds tile memory, or whose density selects no block, are skip
/// markers.
std::vector<SweepRecord> run_sweep(const SweepConfig &config,
                                   const MachineConfig &machine);

struct SweepSummary {
  std::size_t rows = 0;
  std::size_t skipped = 0;
};

/// run_sweep written as CSV. The output path is checked before any work.
SweepSummary sweep(const SweepConfig &config, const MachineConfig &machine,
                   const std::filesystem::path &out);

} // namespace tilespmm
