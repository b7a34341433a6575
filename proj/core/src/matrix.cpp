// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/matrix.hpp"

#include "tilespmm/error.hpp"
#include "tilespmm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace tilespmm {

namespace {

constexpr std::uint64_t kValueStream = 0x76616c756573ULL;

void check_shape(std::size_t m, std::size_t k, std::size_t b) {
  if (!is_supported_block_size(b)) {
    throw Error("block size must be one of 1, 4, 8, 16 but got " +
                std::to_string(b));
  }
  if (m == 0 || k == 0) {
    throw Error("matrix dimensions must be positive");
  }
  if (m % b != 0 || k % b != 0) {
    throw Error("block size " + std::to_string(b) +
                " does not divide matrix shape " + std::to_string(m) + "x" +
                std::to_string(k));
  }
}

// Index range of mask coordinates in each block row.
std::vector<std::size_t> row_starts(const BlockMask &mask) {
  std::vector<std::size_t> starts(mask.block_rows() + 1, 0);
  for (const auto &c : mask.coords()) {
    ++starts[c.row + 1];
  }
  std::partial_sum(starts.begin(), starts.end(), starts.begin());
  return starts;
}

} // namespace

bool is_supported_block_size(std::size_t b) {
  return std::find(std::begin(kBlockSizes), std::end(kBlockSizes), b) !=
         std::end(kBlockSizes);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Real{0}) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<Real> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error("dense matrix data has " + std::to_string(data_.size()) +
                " elements, expected " + std::to_string(rows * cols));
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix id(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    id(i, i) = 1;
  }
  return id;
}

BlockMask::BlockMask(std::size_t m, std::size_t k, std::size_t b,
                     std::vector<BlockCoord> coords)
    : m_(m), k_(k), b_(b), coords_(std::move(coords)) {
  check_shape(m, k, b);
  std::sort(coords_.begin(), coords_.end());
  if (std::adjacent_find(coords_.begin(), coords_.end()) != coords_.end()) {
    throw Error("block mask contains duplicate coordinates");
  }
  for (const auto &c : coords_) {
    if (c.row >= block_rows() || c.col >= block_cols()) {
      throw Error("block coordinate (" + std::to_string(c.row) + ", " +
                  std::to_string(c.col) + ") is out of bounds");
    }
  }
}

BlockMask BlockMask::full(std::size_t m, std::size_t k, std::size_t b) {
  check_shape(m, k, b);
  std::vector<BlockCoord> coords;
  coords.reserve((m / b) * (k / b));
  for (std::uint32_t r = 0; r < m / b; ++r) {
    for (std::uint32_t c = 0; c < k / b; ++c) {
      coords.push_back({r, c});
    }
  }
  return BlockMask(m, k, b, std::move(coords));
}

std::vector<std::size_t> BlockMask::column_counts() const {
  std::vector<std::size_t> counts(block_cols(), 0);
  for (const auto &c : coords_) {
    ++counts[c.col];
  }
  return counts;
}

std::uint64_t BlockMask::fingerprint() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001B3ULL;
    h ^= h >> 29;
  };
  mix(m_);
  mix(k_);
  mix(b_);
  for (const auto &c : coords_) {
    mix((static_cast<std::uint64_t>(c.row) << 32) | c.col);
  }
  return h;
}

BlockSparseMatrix::BlockSparseMatrix(BlockMask mask, std::vector<Real> values)
    : mask_(std::move(mask)), values_(std::move(values)) {
  const std::size_t expected =
      mask_.num_blocks() * mask_.block_size() * mask_.block_size();
  if (values_.size() != expected) {
    throw Error("block sparse values have " + std::to_string(values_.size()) +
                " elements, expected " + std::to_string(expected));
  }
}

std::size_t block_count_for_density(std::size_t m, std::size_t k,
                                    std::size_t b, double d) {
  if (!(d > 0.0 && d <= 1.0)) {
    throw Error("density must lie in (0, 1] but got " + std::to_string(d));
  }
  check_shape(m, k, b);
  const std::size_t total = (m / b) * (k / b);
  const auto count =
      static_cast<std::size_t>(std::llround(d * static_cast<double>(total)));
  if (count == 0) {
    throw Error("density " + std::to_string(d) + " selects no blocks of a " +
                std::to_string(m) + "x" + std::to_string(k) +
                " matrix with block size " + std::to_string(b));
  }
  return std::min(count, total);
}

BlockMask random_block_mask(std::size_t m, std::size_t k, std::size_t b,
                            double d, std::uint64_t seed) {
  const std::size_t count = block_count_for_density(m, k, b, d);
  const std::size_t blockCols = k / b;
  const std::size_t total = (m / b) * blockCols;

  std::vector<std::uint32_t> order(total);
  std::iota(order.begin(), order.end(), 0U);
  SplitMix64 gen(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + gen.below(total - i);
    std::swap(order[i], order[j]);
  }

  std::vector<BlockCoord> coords(count);
  for (std::size_t i = 0; i < count; ++i) {
    coords[i] = {static_cast<std::uint32_t>(order[i] / blockCols),
                 static_cast<std::uint32_t>(order[i] % blockCols)};
  }
  return BlockMask(m, k, b, std::move(coords));
}

double density(const BlockMask &mask) {
  const double area =
      static_cast<double>(mask.block_size() * mask.block_size());
  return static_cast<double>(mask.num_blocks()) * area /
         (static_cast<double>(mask.m()) * static_cast<double>(mask.k()));
}

double flop_count(double m, double k, double n, double d) {
  return 2.0 * m * k * n * d;
}

DenseMatrix dense_matmul(const DenseMatrix &a, const DenseMatrix &x) {
  if (a.cols() != x.rows()) {
    throw Error("dense_matmul: inner dimensions differ (" +
                std::to_string(a.cols()) + " vs " + std::to_string(x.rows()) +
                ")");
  }
  DenseMatrix y(a.rows(), x.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      Real acc = 0;
      for (std::size_t l = 0; l < a.cols(); ++l) {
        acc += a(i, l) * x(l, j);
      }
      y(i, j) = acc;
    }
  }
  return y;
}

DenseMatrix densify(const BlockSparseMatrix &s) {
  const auto &mask = s.mask();
  const std::size_t b = mask.block_size();
  DenseMatrix a(mask.m(), mask.k());
  for (std::size_t i = 0; i < mask.num_blocks(); ++i) {
    const auto c = mask.coords()[i];
    const auto blk = s.block(i);
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t col = 0; col < b; ++col) {
        a(c.row * b + r, c.col * b + col) = blk[r * b + col];
      }
    }
  }
  return a;
}

// Accumulates in the same order as dense_matmul(densify(s), x): for each
// output element, block columns ascending, then columns within the block.
// The skipped terms are exact zeros, so the sums agree bit for bit.
DenseMatrix spmm_oracle(const BlockSparseMatrix &s, const DenseMatrix &x) {
  const auto &mask = s.mask();
  if (mask.k() != x.rows()) {
    throw Error("spmm_oracle: sparse operand has " + std::to_string(mask.k()) +
                " columns but dense operand has " + std::to_string(x.rows()) +
                " rows");
  }
  const std::size_t b = mask.block_size();
  const auto starts = row_starts(mask);
  DenseMatrix y(mask.m(), x.cols());
  for (std::size_t i = 0; i < mask.m(); ++i) {
    const std::size_t br = i / b;
    const std::size_t r = i % b;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      Real acc = 0;
      for (std::size_t blk = starts[br]; blk < starts[br + 1]; ++blk) {
        const auto vals = s.block(blk);
        const std::size_t col0 = mask.coords()[blk].col * b;
        for (std::size_t c = 0; c < b; ++c) {
          acc += vals[r * b + c] * x(col0 + c, j);
        }
      }
      y(i, j) = acc;
    }
  }
  return y;
}

BlockSparseMatrix random_block_sparse(BlockMask mask, std::uint64_t seed) {
  SplitMix64 gen(derive_seed(seed, kValueStream));
  std::vector<Real> values(mask.num_blocks() * mask.block_size() *
                           mask.block_size());
  for (auto &v : values) {
    v = gen.symmetric_unit();
  }
  return BlockSparseMatrix(std::move(mask), std::move(values));
}

DenseMatrix random_dense(std::size_t rows, std::size_t cols,
                         std::uint64_t seed) {
  SplitMix64 gen(seed);
  std::vector<Real> data(rows * cols);
  for (auto &v : data) {
    v = gen.symmetric_unit();
  }
  return DenseMatrix(rows, cols, std::move(data));
}

double max_relative_error(const DenseMatrix &y, const DenseMatrix &ref) {
  if (y.rows() != ref.rows() || y.cols() != ref.cols()) {
    throw Error("max_relative_error: shape mismatch");
  }
  double diff = 0;
  double scale = 0;
  for (std::size_t i = 0; i < ref.data().size(); ++i) {
    diff = std::max(diff, std::abs(y.data()[i] - ref.data()[i]));
    scale = std::max(scale, std::abs(ref.data()[i]));
  }
  if (scale == 0) {
    return diff == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return diff / scale;
}

} // namespace tilespmm
