// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tilespmm {

/// All value arithmetic in the library happens in this type. Storage
/// precision of the modeled device only affects the cost model.
using Real = double;

/// Block sizes supported by the kernels.
inline constexpr std::size_t kBlockSizes[] = {1, 4, 8, 16};

bool is_supported_block_size(std::size_t b);

/// Row-major dense matrix.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Real> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Real operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  Real &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const Real> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<Real> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  std::span<const Real> data() const { return data_; }
  std::span<Real> data() { return data_; }

  friend bool operator==(const DenseMatrix &, const DenseMatrix &) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

struct BlockCoord {
  std::uint32_t row = 0;
  std::uint32_t col = 0;

  friend auto operator<=>(const BlockCoord &, const BlockCoord &) = default;
};

/// Block-level sparsity pattern of an m x k matrix with b x b blocks. The
/// coordinate list is kept sorted by (row, col) and free of duplicates.
class BlockMask {
public:
  BlockMask(std::size_t m, std::size_t k, std::size_t b,
            std::vector<BlockCoord> coords);

  static BlockMask full(std::size_t m, std::size_t k, std::size_t b);

  std::size_t m() const { return m_; }
  std::size_t k() const { return k_; }
  std::size_t block_size() const { return b_; }
  std::size_t block_rows() const { return m_ / b_; }
  std::size_t block_cols() const { return k_ / b_; }
  std::size_t num_blocks() const { return coords_.size(); }
  std::span<const BlockCoord> coords() const { return coords_; }

  /// Number of blocks in each block column.
  std::vector<std::size_t> column_counts() const;

  /// Order-sensitive 64-bit digest of shape and coordinates.
  std::uint64_t fingerprint() const;

  friend bool operator==(const BlockMask &, const BlockMask &) = default;

private:
  std::size_t m_;
  std::size_t k_;
  std::size_t b_;
  std::vector<BlockCoord> coords_;
};

/// Non-zero blocks of a masked weight matrix. Block i of the mask occupies
/// values[i*b*b, (i+1)*b*b), stored row-major.
class BlockSparseMatrix {
public:
  BlockSparseMatrix(BlockMask mask, std::vector<Real> values);

  const BlockMask &mask() const { return mask_; }
  std::span<const Real> values() const { return values_; }
  std::span<const Real> block(std::size_t i) const {
    const std::size_t area = mask_.block_size() * mask_.block_size();
    return {values_.data() + i * area, area};
  }

private:
  BlockMask mask_;
  std::vector<Real> values_;
};

/// Exactly round(d*m*k/b^2) distinct blocks drawn without replacement by a
/// partial Fisher-Yates shuffle driven by SplitMix64(seed).
BlockMask random_block_mask(std::size_t m, std::size_t k, std::size_t b,
                            double d, std::uint64_t seed);

/// Number of blocks random_block_mask would return, or an error.
std::size_t block_count_for_density(std::size_t m, std::size_t k,
                                    std::size_t b, double d);

double density(const BlockMask &mask);

/// Useful arithmetic of a masked matmul: 2*m*k*n*d.
double flop_count(double m, double k, double n, double d);

DenseMatrix dense_matmul(const DenseMatrix &a, const DenseMatrix &x);
DenseMatrix densify(const BlockSparseMatrix &s);
DenseMatrix spmm_oracle(const BlockSparseMatrix &s, const DenseMatrix &x);

/// Values in (-1, 1) for each block of mask.
BlockSparseMatrix random_block_sparse(BlockMask mask, std::uint64_t seed);
DenseMatrix random_dense(std::size_t rows, std::size_t cols,
                         std::uint64_t seed);

/// Sub-stream for the dense operand X of a seeded problem.
inline constexpr std::uint64_t kInputStream = 0x696e707574ULL;

/// max|y - ref| / max|ref|; 0 when both are all-zero.
double max_relative_error(const DenseMatrix &y, const DenseMatrix &ref);

} // namespace tilespmm
