// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tilespmm/records.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace tilespmm {

/// Accepts "1/16", "0.0625" or "1". Result must lie in (0, 1].
double parse_density(std::string_view text);

/// Keeps, for each (m, d, b, mode, dtype), the row with the highest
/// achieved TFLOP/s over n (ties: smaller n). Skipped rows are ignored.
/// Groups appear in order of first occurrence.
std::vector<SweepRecord> best_over_batch(std::span<const SweepRecord> records);

/// ratio ~= c * m^alpha * d^beta * b^gamma
struct PowerLawFit {
  double c = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double residual_rms = 0.0; // natural-log space
  std::size_t samples = 0;

  double predict(double m, double d, double b) const;
};

struct PowerLawSample {
  double m = 0;
  double d = 0;
  double b = 0;
  double ratio = 0;
};

/// Least squares on log(ratio) = log c + alpha log m + beta log d +
/// gamma log b. Rank-deficient designs are an error.
PowerLawFit fit_power_law(std::span<const PowerLawSample> samples);

/// Fits the speedup column of the best-over-batch rows of one mode and
/// dtype.
PowerLawFit fit_power_law(std::span<const SweepRecord> records,
                          Mode mode = Mode::static_sparse,
                          DataType dtype = DataType::fp16);

/// Static-over-dense speedups laid out with (b, d) rows and (m, n) columns.
struct SpeedupGrid {
  struct RowKey {
    std::size_t b;
    double d;
  };
  struct ColKey {
    std::size_t m;
    std::size_t n;
  };
  std::vector<RowKey> rows;       // b ascending, then d descending
  std::vector<ColKey> cols;       // m ascending, then n ascending
  std::vector<std::optional<double>> cells; // row-major; empty = missing

  const std::optional<double> &at(std::size_t row, std::size_t col) const {
    return cells[row * cols.size() + col];
  }
};

SpeedupGrid speedup_grid(std::span<const SweepRecord> records,
                         DataType dtype = DataType::fp16,
                         Mode mode = Mode::static_sparse);

/// Header "b,d,m<M>_n<N>,..."; missing cells are "NA".
void write_grid_csv(std::ostream &out, const SpeedupGrid &grid);

struct DensityRatio {
  double d = 0;
  double ratio = 0;
};

/// Density where the speedup ratio crosses 1, interpolating log(ratio)
/// linearly in log(d) between the bracketing pair nearest d = 1. Empty when
/// no adjacent pair brackets 1.
std::optional<double> crossover_density(std::span<const DensityRatio> points);

/// Best-over-batch static rows at (m, b, dtype), then the above.
std::optional<double> crossover_density(std::span<const SweepRecord> records,
                                        std::size_t m, std::size_t b,
                                        DataType dtype);

} // namespace tilespmm
