// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/rng.hpp"

namespace tilespmm {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 gen(seed ^ (stream * 0xD1B54A32D192ED03ULL));
  gen.next();
  return gen.next();
}

} // namespace tilespmm
