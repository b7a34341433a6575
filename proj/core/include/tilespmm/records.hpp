// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tilespmm/machine.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tilespmm {

enum class Mode { dense, static_sparse, dynamic_sparse };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

/// One sweep row. A skipped row (memory audit exceeded) has no measurements.
struct SweepRecord {
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t b = 1;
  double d = 1.0;
  Mode mode = Mode::dense;
  DataType dtype = DataType::fp16;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> total_cycles;
  std::optional<double> achieved_tflops;
  std::optional<double> speedup; // dense cycles / this row's cycles

  bool skipped() const { return !total_cycles.has_value(); }
  friend bool operator==(const SweepRecord &, const SweepRecord &) = default;
};

inline constexpr std::string_view kCsvHeader =
    "m,k,n,b,d,mode,dtype,seed,total_cycles,achieved_tflops,speedup";

/// "%.6g".
std::string format_number(double value);

void write_csv(std::ostream &out, std::span<const SweepRecord> records);
std::vector<SweepRecord> read_csv(std::istream &in);

void save_records(const std::filesystem::path &path,
                  std::span<const SweepRecord> records);
std::vector<SweepRecord> load_records(const std::filesystem::path &path);

} // namespace tilespmm
