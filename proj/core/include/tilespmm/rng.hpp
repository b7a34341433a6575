// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace tilespmm {

/// splitmix64 generator. The output sequence is part of the external
/// contract: masks and values generated from a seed are reproducible in any
/// language that implements the same three-line mixer.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// floor(next() * range / 2^64), in [0, range).
  std::uint64_t below(std::uint64_t range) {
    __extension__ using Wide = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<Wide>(next()) * range) >> 64);
  }

  /// Uniform in the open interval (-1, 1).
  double symmetric_unit() {
    const double u = (static_cast<double>(next() >> 11) + 0.5) * 0x1p-53;
    return 2.0 * u - 1.0;
  }

private:
  std::uint64_t state_;
};

/// Independent seed for a named sub-stream (values, dense input, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace tilespmm
