// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/error.hpp"
#include "tilespmm/matrix.hpp"
#include "tilespmm/rng.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace tilespmm;

TEST(SplitMix64, ReferenceVectors) {
  SplitMix64 gen(1234567);
  EXPECT_EQ(gen.next(), 6457827717110365317ULL);
  EXPECT_EQ(gen.next(), 3203168211198807973ULL);
  EXPECT_EQ(gen.next(), 9817491932198370423ULL);
  EXPECT_EQ(gen.next(), 4593380528125082431ULL);
  EXPECT_EQ(gen.next(), 16408922859458223821ULL);
  SplitMix64 zero(0);
  EXPECT_EQ(zero.next(), 0xE220A8397B1DCDAFULL);
}

TEST(SplitMix64, BelowAndUnitRanges) {
  SplitMix64 gen(42);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_LT(gen.below(7), 7U);
    const double u = gen.symmetric_unit();
    EXPECT_GT(u, -1.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_EQ(SplitMix64(5).below(1), 0U);
}

TEST(SplitMix64, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 1), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 1), derive_seed(2, 1));
  EXPECT_EQ(derive_seed(9, 3), derive_seed(9, 3));
}

TEST(RandomBlockMask, FullDensityHasEveryBlock) {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    const auto mask = random_block_mask(8, 8, 4, 1.0, seed);
    EXPECT_EQ(mask.num_blocks(), 4U);
    EXPECT_EQ(mask, BlockMask::full(8, 8, 4));
  }
}

TEST(RandomBlockMask, QuarterDensitySeedSevenIsOneFixedBlock) {
  const auto mask = random_block_mask(8, 8, 4, 0.25, 7);
  ASSERT_EQ(mask.num_blocks(), 1U);
  // Frozen: first Fisher-Yates draw of SplitMix64(7) over 4 blocks.
  SplitMix64 gen(7);
  const auto idx = gen.below(4);
  EXPECT_EQ(mask.coords()[0], (BlockCoord{static_cast<std::uint32_t>(idx / 2),
                                          static_cast<std::uint32_t>(idx % 2)}));
  EXPECT_EQ(mask.coords()[0], (BlockCoord{0, 1}));
}

TEST(RandomBlockMask, UnstructuredCountAndUniqueness) {
  const auto mask = random_block_mask(64, 64, 1, 1.0 / 8, 3);
  ASSERT_EQ(mask.num_blocks(), 512U);
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto c : mask.coords()) {
    EXPECT_LT(c.row, 64U);
    EXPECT_LT(c.col, 64U);
    EXPECT_TRUE(seen.emplace(c.row, c.col).second);
  }
}

TEST(RandomBlockMask, PureFunctionOfArguments) {
  EXPECT_EQ(random_block_mask(128, 64, 4, 0.2, 11),
            random_block_mask(128, 64, 4, 0.2, 11));
  EXPECT_NE(random_block_mask(128, 64, 4, 0.2, 11),
            random_block_mask(128, 64, 4, 0.2, 12));
}

TEST(RandomBlockMask, RejectsBadArguments) {
  EXPECT_THROW(random_block_mask(8, 8, 3, 0.5, 1), Error);   // unsupported b
  EXPECT_THROW(random_block_mask(12, 8, 8, 0.5, 1), Error);  // b does not divide m
  EXPECT_THROW(random_block_mask(8, 8, 4, 0.0, 1), Error);   // d out of range
  EXPECT_THROW(random_block_mask(8, 8, 4, 1.5, 1), Error);
  EXPECT_THROW(random_block_mask(8, 8, 8, 0.25, 1), Error);  // rounds to 0 blocks
}

TEST(BlockMask, ValidatesCoordinates) {
  EXPECT_THROW(BlockMask(8, 8, 4, {{2, 0}}), Error);
  EXPECT_THROW(BlockMask(8, 8, 4, {{0, 1}, {0, 1}}), Error);
  const BlockMask sorted(8, 8, 4, {{1, 1}, {0, 1}, {1, 0}});
  EXPECT_EQ(sorted.coords()[0], (BlockCoord{0, 1}));
  EXPECT_EQ(sorted.coords()[2], (BlockCoord{1, 1}));
  EXPECT_EQ(sorted.column_counts(), (std::vector<std::size_t>{1, 2}));
}

TEST(Density, Examples) {
  EXPECT_DOUBLE_EQ(density(BlockMask::full(16, 8, 4)), 1.0);
  EXPECT_DOUBLE_EQ(density(BlockMask(8, 8, 4, {})), 0.0);
  EXPECT_DOUBLE_EQ(density(BlockMask(8, 8, 4, {{1, 0}})), 0.25);
}

TEST(Density, TimesAreaEqualsBlockCount) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (std::size_t b : kBlockSizes) {
      const auto mask = random_block_mask(64, 32, b, 0.3, seed);
      EXPECT_EQ(density(mask) * 64 * 32 / static_cast<double>(b * b),
                static_cast<double>(mask.num_blocks()));
    }
  }
}

TEST(FlopCount, Examples) {
  EXPECT_EQ(flop_count(4096, 4096, 4096, 1.0 / 16), 8589934592.0);
  EXPECT_EQ(flop_count(8, 8, 4, 0.25), 128.0);
  EXPECT_EQ(flop_count(3, 5, 7, 1.0), 2.0 * 3 * 5 * 7);
}

TEST(DenseMatmul, HandCase) {
  const DenseMatrix a(2, 2, {1, 2, 3, 4});
  const DenseMatrix x(2, 2, {5, 6, 7, 8});
  EXPECT_EQ(dense_matmul(a, x), DenseMatrix(2, 2, {19, 22, 43, 50}));
}

TEST(DenseMatmul, IdentityAndZero) {
  const auto x = random_dense(6, 3, 5);
  EXPECT_EQ(dense_matmul(DenseMatrix::identity(6), x), x);
  EXPECT_EQ(dense_matmul(DenseMatrix(4, 6), x), DenseMatrix(4, 3));
  EXPECT_THROW(dense_matmul(DenseMatrix(4, 5), x), Error);
}

TEST(Densify, Examples) {
  EXPECT_EQ(densify(random_block_sparse(BlockMask(8, 8, 4, {}), 1)),
            DenseMatrix(8, 8));
  const auto single = random_block_sparse(BlockMask::full(4, 4, 4), 2);
  const auto d = densify(single);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(d.data()[i], single.values()[i]);
  }
}

TEST(Densify, NonZeroCountMatchesBlocks) {
  const auto s = random_block_sparse(random_block_mask(32, 64, 4, 0.3, 8), 8);
  const auto d = densify(s);
  std::size_t nonzero = 0;
  for (const auto v : d.data()) {
    nonzero += v != 0 ? 1 : 0;
  }
  EXPECT_EQ(nonzero, s.mask().num_blocks() * 16);
}

TEST(SpmmOracle, MatchesDensifyExactly) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (std::size_t b : kBlockSizes) {
      const auto s = random_block_sparse(random_block_mask(32, 48, b, 0.25, seed),
                                         seed);
      const auto x = random_dense(48, 5, seed + 100);
      EXPECT_EQ(spmm_oracle(s, x), dense_matmul(densify(s), x));
    }
  }
  const auto small = random_block_sparse(random_block_mask(8, 8, 4, 0.25, 3), 3);
  const auto x = random_dense(8, 4, 4);
  EXPECT_EQ(spmm_oracle(small, x), dense_matmul(densify(small), x));
}

TEST(SpmmOracle, FullAndEmpty) {
  const auto full = random_block_sparse(BlockMask::full(8, 8, 1), 4);
  const auto x = random_dense(8, 3, 9);
  EXPECT_EQ(spmm_oracle(full, x), dense_matmul(densify(full), x));
  const auto empty = random_block_sparse(BlockMask(8, 8, 4, {}), 4);
  EXPECT_EQ(spmm_oracle(empty, x), DenseMatrix(8, 3));
  EXPECT_THROW(spmm_oracle(full, random_dense(4, 3, 1)), Error);
}

TEST(RelativeError, Definition) {
  const DenseMatrix ref(1, 3, {1, -4, 2});
  const DenseMatrix y(1, 3, {1, -3, 2});
  EXPECT_DOUBLE_EQ(max_relative_error(y, ref), 0.25);
  EXPECT_EQ(max_relative_error(DenseMatrix(2, 2), DenseMatrix(2, 2)), 0.0);
}
