// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/execute.hpp"

#include "tilespmm/schedule.hpp"

#include <algorithm>
#include <numeric>

namespace tilespmm {

namespace {

using Buffer = std::vector<Real>;

// Pairwise sum in partition-index order: ((p0 + p1) + (p2 + p3)) ...
void tree_sum(std::vector<const Real *> parts, std::size_t len, Real *out) {
  std::vector<Buffer> level;
  level.reserve(parts.size());
  for (const auto *p : parts) {
    level.emplace_back(p, p + len);
  }
  while (level.size() > 1) {
    std::vector<Buffer> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      Buffer sum(len);
      for (std::size_t e = 0; e < len; ++e) {
        sum[e] = level[i][e] + level[i + 1][e];
      }
      next.push_back(std::move(sum));
    }
    if (level.size() % 2 == 1) {
      next.push_back(std::move(level.back()));
    }
    level = std::move(next);
  }
  std::copy(level.front().begin(), level.front().end(), out);
}

// Copies rows [row0, row0+rows) and columns [col0, col0+cols) of x.
Buffer slice_of(const DenseMatrix &x, std::size_t row0, std::size_t rows,
                std::size_t col0, std::size_t cols) {
  Buffer out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto src = x.row(row0 + r).subspan(col0, cols);
    std::copy(src.begin(), src.end(), out.begin() + r * cols);
  }
  return out;
}

// Partials of one reduction group, one per k-partition, each `rows` x `cols`.
struct ReduceGroup {
  std::vector<TileSlot<Buffer> *> partials; // indexed by pk
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t out_row0 = 0; // output row of partial row 0
  std::size_t out_col0 = 0;
};

struct ReduceCost {
  std::uint64_t bytes = 0;
  std::uint64_t max_adds = 0;
};

// Two supersteps: reducer pk receives its row share of every other
// partial, then sums the shares in partition order.
ReduceCost reduce_groups(std::vector<ReduceGroup> &groups, std::size_t &step,
                         std::size_t bytesPerElement, AccessAudit &audit,
                         DenseMatrix &y, ExecutionTrace &trace,
                         const MachineConfig &machine, DataType dtype) {
  struct Inbox {
    TileSlot<std::vector<Buffer>> shares;
    std::size_t group = 0;
    std::size_t pk = 0;
    std::size_t row0 = 0;
    std::size_t rows = 0;
  };
  std::vector<Inbox> inboxes;
  ReduceCost cost;

  const std::size_t exchangeStep = step;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto &group = groups[g];
    const std::size_t qk = group.partials.size();
    const auto shares = balanced_sizes(group.rows, qk);
    std::size_t row0 = 0;
    for (std::size_t pk = 0; pk < qk; ++pk) {
      std::vector<Buffer> received(qk);
      for (std::size_t src = 0; src < qk; ++src) {
        const auto &partial = group.partials[src]->read(exchangeStep, audit);
        received[src].assign(partial.begin() + row0 * group.cols,
                             partial.begin() + (row0 + shares[pk]) * group.cols);
        if (src != pk) {
          cost.bytes += shares[pk] * group.cols * bytesPerElement;
        }
      }
      Inbox inbox;
      inbox.shares.deliver(std::move(received), exchangeStep);
      inbox.group = g;
      inbox.pk = pk;
      inbox.row0 = row0;
      inbox.rows = shares[pk];
      inboxes.push_back(std::move(inbox));
      row0 += shares[pk];
    }
  }
  trace.exchange(cost.bytes, machine);
  trace.sync(machine);
  ++step;

  for (auto &inbox : inboxes) {
    const auto &group = groups[inbox.group];
    const auto &shares = inbox.shares.read(step, audit);
    const std::size_t len = inbox.rows * group.cols;
    std::vector<const Real *> parts;
    for (const auto &share : shares) {
      parts.push_back(share.data());
    }
    Buffer sum(len);
    if (len > 0) {
      tree_sum(parts, len, sum.data());
    }
    for (std::size_t r = 0; r < inbox.rows; ++r) {
      for (std::size_t c = 0; c < group.cols; ++c) {
        y(group.out_row0 + inbox.row0 + r, group.out_col0 + c) =
            sum[r * group.cols + c];
      }
    }
    cost.max_adds = std::max<std::uint64_t>(
        cost.max_adds, std::uint64_t{len} * (shares.size() - 1));
  }
  trace.reduce(cost.max_adds, dtype, machine);
  return cost;
}

void check_static_operands(const StaticPlan &plan, const BlockSparseMatrix &s,
                           const DenseMatrix &x) {
  if (s.mask().fingerprint() != plan.mask_fingerprint) {
    throw Error("static plan was built for a different sparsity pattern");
  }
  if (x.rows() != plan.k || x.cols() != plan.n) {
    throw Error("dense operand is " + std::to_string(x.rows()) + "x" +
                std::to_string(x.cols()) + " but the plan expects " +
                std::to_string(plan.k) + "x" + std::to_string(plan.n));
  }
}

} // namespace

SpmmResult run_static(const StaticPlan &plan, const BlockSparseMatrix &s,
                      const DenseMatrix &x, const MachineConfig &machine,
                      DataType dtype) {
  check_static_operands(plan, s, x);
  const std::size_t b = plan.b;
  const std::size_t area = b * b;
  const std::size_t bytes = machine.bytes_per_element(dtype);
  const std::size_t numTiles = plan.qk * plan.qn;

  struct Tile {
    TileSlot<Buffer> weights;
    TileSlot<Buffer> input;
    TileSlot<Buffer> partial;
  };
  std::vector<Tile> tiles(numTiles);
  SpmmResult result;
  auto &trace = result.trace;
  auto &audit = result.audit;
  trace.per_tile_macs.assign(numTiles, 0);

  // Host placement (not timed): each tile gets its partition's values.
  const auto slices = reorder_values(s, plan);
  for (std::size_t pk = 0; pk < plan.qk; ++pk) {
    for (std::size_t pn = 0; pn < plan.qn; ++pn) {
      tiles[plan.tile(pk, pn)].weights.deliver(slices[pk], 0);
    }
  }

  std::size_t step = 1;
  std::uint64_t exchanged = 0;
  for (std::size_t pk = 0; pk < plan.qk; ++pk) {
    for (std::size_t pn = 0; pn < plan.qn; ++pn) {
      auto slice = slice_of(x, plan.k_boundaries[pk] * b, plan.k_width(pk),
                            plan.n_boundaries[pn], plan.n_slice(pn));
      exchanged += slice.size() * bytes;
      tiles[plan.tile(pk, pn)].input.deliver(std::move(slice), step);
    }
  }
  trace.exchange(exchanged, machine);
  trace.sync(machine);
  ++step;

  std::uint64_t slowest = 0;
  std::uint64_t macsTotal = 0;
  const auto coords = s.mask().coords();
  for (std::size_t pk = 0; pk < plan.qk; ++pk) {
    const std::size_t col0 = plan.k_boundaries[pk] * b;
    for (std::size_t pn = 0; pn < plan.qn; ++pn) {
      auto &tile = tiles[plan.tile(pk, pn)];
      const std::size_t cols = plan.n_slice(pn);
      const auto &w = tile.weights.read(step, audit);
      const auto &in = tile.input.read(step, audit);
      Buffer partial(plan.m * cols, Real{0});
      const auto &blocks = plan.partition_blocks[pk];
      for (std::size_t t = 0; t < blocks.size(); ++t) {
        const auto c = coords[blocks[t]];
        const Real *vals = w.data() + t * area;
        for (std::size_t r = 0; r < b; ++r) {
          Real *out = partial.data() + (c.row * b + r) * cols;
          for (std::size_t e = 0; e < b; ++e) {
            const Real v = vals[r * b + e];
            const Real *xin = in.data() + (c.col * b + e - col0) * cols;
            for (std::size_t j = 0; j < cols; ++j) {
              out[j] += v * xin[j];
            }
          }
        }
      }
      const std::uint64_t macs = std::uint64_t{blocks.size()} * area * cols;
      trace.per_tile_macs[plan.tile(pk, pn)] = macs;
      macsTotal += macs;
      slowest = std::max(slowest, compute_cycles(macs, b, dtype, machine));
      tile.partial.deliver(std::move(partial), step);
      trace.max_tile_bytes =
          std::max<std::size_t>(trace.max_tile_bytes,
                                (w.size() + in.size() + plan.m * cols) * bytes);
    }
  }
  trace.compute(slowest, macsTotal);

  result.y = DenseMatrix(plan.m, plan.n);
  if (plan.qk == 1) {
    for (std::size_t pn = 0; pn < plan.qn; ++pn) {
      const auto &partial = tiles[plan.tile(0, pn)].partial.read(step + 1, audit);
      const std::size_t cols = plan.n_slice(pn);
      for (std::size_t i = 0; i < plan.m; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          result.y(i, plan.n_boundaries[pn] + j) = partial[i * cols + j];
        }
      }
    }
  } else {
    trace.sync(machine);
    ++step;
    std::vector<ReduceGroup> groups(plan.qn);
    for (std::size_t pn = 0; pn < plan.qn; ++pn) {
      auto &group = groups[pn];
      group.rows = plan.m;
      group.cols = plan.n_slice(pn);
      group.out_col0 = plan.n_boundaries[pn];
      for (std::size_t pk = 0; pk < plan.qk; ++pk) {
        group.partials.push_back(&tiles[plan.tile(pk, pn)].partial);
      }
    }
    reduce_groups(groups, step, bytes, audit, result.y, trace, machine, dtype);
  }

  const double nnz = static_cast<double>(s.mask().num_blocks() * area);
  trace.finish(2.0 * nnz * static_cast<double>(plan.n), machine);
  return result;
}

ExecutionTrace trace_static(const StaticPlan &plan,
                            const MachineConfig &machine, DataType dtype) {
  std::size_t totalBlocks = 0;
  for (const auto &blocks : plan.partition_blocks) {
    totalBlocks += blocks.size();
  }
  StaticWork work;
  work.m = plan.m;
  work.k = plan.k;
  work.n = plan.n;
  work.b = plan.b;
  work.qk = plan.qk;
  work.max_tile_blocks = plan.max_partition_blocks();
  work.max_n_slice = plan.max_n_slice();
  work.total_blocks = totalBlocks;

  ExecutionTrace trace;
  static_schedule(trace, work, dtype, machine);

  const std::size_t area = plan.b * plan.b;
  const std::size_t bytes = machine.bytes_per_element(dtype);
  trace.per_tile_macs.assign(plan.qk * plan.qn, 0);
  for (std::size_t pk = 0; pk < plan.qk; ++pk) {
    const std::size_t blocks = plan.partition_blocks[pk].size();
    for (std::size_t pn = 0; pn < plan.qn; ++pn) {
      const std::size_t cols = plan.n_slice(pn);
      trace.per_tile_macs[plan.tile(pk, pn)] =
          std::uint64_t{blocks} * area * cols;
      trace.max_tile_bytes = std::max<std::size_t>(
          trace.max_tile_bytes,
          (blocks * area + plan.k_width(pk) * cols + plan.m * cols) * bytes);
    }
  }
  trace.finish(2.0 * static_cast<double>(totalBlocks * area) *
                   static_cast<double>(plan.n),
               machine);
  return trace;
}

namespace {

void check_dynamic_operands(const DynamicPlan &plan, const BucketSet &buckets,
                            const DenseMatrix *x) {
  if (buckets.buckets.size() != plan.num_buckets()) {
    throw Error("bucket set has " + std::to_string(buckets.buckets.size()) +
                " buckets but the plan needs " +
                std::to_string(plan.num_buckets()));
  }
  for (const auto &bucket : buckets.buckets) {
    if (bucket.meta.size() > plan.bucket_block_capacity()) {
      throw Error("bucket exceeds the planned capacity");
    }
  }
  if (x != nullptr) {
    if (!buckets.has_values) {
      throw Error("bucket set carries no values; encode with values to run");
    }
    if (x->rows() != plan.k || x->cols() != plan.n) {
      throw Error("dense operand shape does not match the dynamic plan");
    }
  }
}

std::size_t max_of(const std::vector<std::size_t> &v) {
  return *std::max_element(v.begin(), v.end());
}

std::size_t dynamic_tile_bytes(const DynamicPlan &plan, DataType dtype,
                               const MachineConfig &machine) {
  const std::size_t bytes = machine.bytes_per_element(dtype);
  const std::size_t nSlice = max_of(plan.part_n);
  return plan.bucket_bytes(dtype, machine) +
         (max_of(plan.part_k) * plan.b * nSlice +
          max_of(plan.part_m) * plan.b * nSlice) *
             bytes;
}

} // namespace

SpmmResult run_dynamic(const DynamicPlan &plan, const BucketSet &buckets,
                       const DenseMatrix &x, const MachineConfig &machine,
                       DataType dtype) {
  check_dynamic_operands(plan, buckets, &x);
  const std::size_t b = plan.b;
  const std::size_t area = b * b;
  const std::size_t bytes = machine.bytes_per_element(dtype);
  const std::size_t numBuckets = plan.num_buckets();
  const std::size_t numTiles = plan.total_partitions();
  const std::uint64_t bucketBytes = plan.bucket_bytes(dtype, machine);

  struct RuntimeBucket {
    Bucket data;
    std::vector<char> processed;
  };
  struct Tile {
    TileSlot<RuntimeBucket> bucket;
    TileSlot<Buffer> input;
    TileSlot<Buffer> partial;
  };
  std::vector<Tile> tiles(numTiles);
  SpmmResult result;
  auto &trace = result.trace;
  auto &audit = result.audit;
  trace.per_tile_macs.assign(numTiles, 0);

  // Host placement (not timed): bucket h lands on partition (h, pn = 0).
  for (std::size_t h = 0; h < numBuckets; ++h) {
    RuntimeBucket rb{buckets.buckets[h],
                     std::vector<char>(buckets.buckets[h].meta.size(), 0)};
    tiles[h * plan.qn].bucket.deliver(std::move(rb), 0);
  }

  std::size_t step = 1;
  std::uint64_t exchanged = 0;
  for (std::size_t tile = 0; tile < numTiles; ++tile) {
    const auto p = plan.partition_of_tile(tile);
    auto slice = slice_of(x, plan.col_offset(p.pk) * b, plan.part_k[p.pk] * b,
                          plan.n_offset(p.pn), plan.part_n[p.pn]);
    exchanged += slice.size() * bytes;
    tiles[tile].input.deliver(std::move(slice), step);
    if (p.pn != 0) {
      const auto &home = tiles[tile - p.pn].bucket.read(step, audit);
      tiles[tile].bucket.deliver(home, step);
    }
  }
  // Buckets are broadcast at their full planned size.
  exchanged += (plan.qn - 1) * numBuckets * bucketBytes;
  trace.exchange(exchanged, machine);
  trace.sync(machine);
  ++step;

  for (std::size_t tile = 0; tile < numTiles; ++tile) {
    const auto p = plan.partition_of_tile(tile);
    tiles[tile].partial.deliver(
        Buffer(plan.part_m[p.pm] * b * plan.part_n[p.pn], Real{0}), 0);
  }

  std::uint64_t macsTotal = 0;
  auto computeStep = [&]() {
    std::uint64_t slowest = 0;
    std::uint64_t macsStep = 0;
    for (std::size_t tile = 0; tile < numTiles; ++tile) {
      const auto p = plan.partition_of_tile(tile);
      const std::size_t cols = plan.part_n[p.pn];
      auto &rb = tiles[tile].bucket.local(step, audit);
      const auto &in = tiles[tile].input.read(step, audit);
      auto &partial = tiles[tile].partial.local(step, audit);
      std::uint64_t matched = 0;
      for (std::size_t e = 0; e < rb.data.meta.size(); ++e) {
        const auto &entry = rb.data.meta[e];
        if (rb.processed[e] || entry.home_pm != p.pm || entry.home_pk != p.pk) {
          continue;
        }
        const Real *vals = rb.data.values.data() + entry.value_offset * area;
        for (std::size_t r = 0; r < b; ++r) {
          Real *out = partial.data() + (entry.block_row * b + r) * cols;
          for (std::size_t c = 0; c < b; ++c) {
            const Real v = vals[r * b + c];
            const Real *xin = in.data() + (entry.block_col * b + c) * cols;
            for (std::size_t j = 0; j < cols; ++j) {
              out[j] += v * xin[j];
            }
          }
        }
        rb.processed[e] = 1;
        ++matched;
      }
      const std::uint64_t macs = matched * area * cols;
      trace.per_tile_macs[tile] += macs;
      macsStep += macs;
      slowest = std::max(slowest,
                         compute_cycles(macs, b, dtype, machine) +
                             rb.data.meta.size() * machine.meta_overhead_cycles);
    }
    for (auto &tile : tiles) {
      // Accumulators are rewritten in this superstep.
      auto updated = std::move(tile.partial.local(step, audit));
      tile.partial.deliver(std::move(updated), step);
    }
    macsTotal += macsStep;
    trace.compute(slowest, macsStep);
  };

  auto allProcessed = [&]() {
    for (auto &tile : tiles) {
      const auto &rb = tile.bucket.read(step, audit);
      if (std::find(rb.processed.begin(), rb.processed.end(), 0) !=
          rb.processed.end()) {
        return false;
      }
    }
    return true;
  };

  computeStep();
  trace.sync(machine);
  ++step;
  while (!allProcessed()) {
    if (trace.propagation_steps == numBuckets) {
      throw Error("propagation did not finish within qm*qk steps; the bucket "
                  "encoding is inconsistent with the plan");
    }
    ++trace.propagation_steps;
    std::vector<RuntimeBucket> shifted(numTiles);
    for (std::size_t tile = 0; tile < numTiles; ++tile) {
      const auto p = plan.partition_of_tile(tile);
      const std::size_t h = plan.bucket_of(p.pm, p.pk);
      const std::size_t from = ((h + 1) % numBuckets) * plan.qn + p.pn;
      shifted[tile] = tiles[from].bucket.read(step, audit);
    }
    for (std::size_t tile = 0; tile < numTiles; ++tile) {
      tiles[tile].bucket.deliver(std::move(shifted[tile]), step);
    }
    trace.exchange(numTiles * bucketBytes, machine);
    trace.sync(machine);
    ++step;
    computeStep();
    trace.sync(machine);
    ++step;
  }

  result.y = DenseMatrix(plan.m, plan.n);
  if (plan.qk == 1) {
    for (std::size_t tile = 0; tile < numTiles; ++tile) {
      const auto p = plan.partition_of_tile(tile);
      const auto &partial = tiles[tile].partial.read(step, audit);
      const std::size_t rows = plan.part_m[p.pm] * b;
      const std::size_t cols = plan.part_n[p.pn];
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          result.y(plan.row_offset(p.pm) * b + i, plan.n_offset(p.pn) + j) =
              partial[i * cols + j];
        }
      }
    }
  } else {
    std::vector<ReduceGroup> groups;
    for (std::size_t pm = 0; pm < plan.qm; ++pm) {
      for (std::size_t pn = 0; pn < plan.qn; ++pn) {
        ReduceGroup group;
        group.rows = plan.part_m[pm] * b;
        group.cols = plan.part_n[pn];
        group.out_row0 = plan.row_offset(pm) * b;
        group.out_col0 = plan.n_offset(pn);
        for (std::size_t pk = 0; pk < plan.qk; ++pk) {
          group.partials.push_back(&tiles[plan.tile_of({pm, pk, pn})].partial);
        }
        groups.push_back(std::move(group));
      }
    }
    reduce_groups(groups, step, bytes, audit, result.y, trace, machine, dtype);
  }

  trace.max_tile_bytes = dynamic_tile_bytes(plan, dtype, machine);
  std::size_t nnzBlocks = 0;
  for (const auto &bucket : buckets.buckets) {
    nnzBlocks += bucket.meta.size();
  }
  trace.finish(2.0 * static_cast<double>(nnzBlocks * area) *
                   static_cast<double>(plan.n),
               machine);
  return result;
}

BucketOccupancy summarize_buckets(const DynamicPlan &plan,
                                  const BucketSet &buckets) {
  check_dynamic_operands(plan, buckets, nullptr);
  const std::size_t numBuckets = plan.num_buckets();
  BucketOccupancy occ;
  occ.num_buckets = numBuckets;
  occ.resident.assign(numBuckets, 0);
  occ.home_count.assign(numBuckets, 0);
  // Entry in bucket p with home h reaches tile h after (p - h) mod Q shifts.
  auto delay = [&](std::size_t p, const MetaInfoEntry &entry) {
    const std::size_t home = plan.bucket_of(entry.home_pm, entry.home_pk);
    return std::pair{home, (p + numBuckets - home) % numBuckets};
  };
  for (std::size_t p = 0; p < numBuckets; ++p) {
    occ.resident[p] = buckets.buckets[p].meta.size();
    occ.total_blocks += occ.resident[p];
    for (const auto &entry : buckets.buckets[p].meta) {
      const auto [home, shift] = delay(p, entry);
      occ.steps = std::max(occ.steps, shift);
      ++occ.home_count[home];
    }
  }
  occ.arrivals.assign(numBuckets * (occ.steps + 1), 0);
  for (std::size_t p = 0; p < numBuckets; ++p) {
    for (const auto &entry : buckets.buckets[p].meta) {
      const auto [home, shift] = delay(p, entry);
      ++occ.arrivals[home * (occ.steps + 1) + shift];
    }
  }
  return occ;
}

ExecutionTrace trace_dynamic(const DynamicPlan &plan, const BucketSet &buckets,
                             const MachineConfig &machine, DataType dtype) {
  return trace_dynamic(plan, summarize_buckets(plan, buckets), machine, dtype);
}

ExecutionTrace trace_dynamic(const DynamicPlan &plan,
                             const BucketOccupancy &occ,
                             const MachineConfig &machine, DataType dtype) {
  const std::size_t numBuckets = plan.num_buckets();
  if (occ.num_buckets != numBuckets) {
    throw Error("bucket occupancy does not match the dynamic plan");
  }
  const std::size_t b = plan.b;
  const std::uint64_t area = b * b;
  const std::uint64_t bytes = machine.bytes_per_element(dtype);
  const std::size_t numTiles = plan.total_partitions();
  const std::uint64_t bucketBytes = plan.bucket_bytes(dtype, machine);
  const std::uint64_t nSlice = max_of(plan.part_n);
  const std::size_t steps = occ.steps;

  ExecutionTrace trace;
  trace.exchange(plan.qm * std::uint64_t{plan.k} * plan.n * bytes +
                     (plan.qn - 1) * numBuckets * bucketBytes,
                 machine);
  trace.sync(machine);
  for (std::size_t s = 0; s <= steps; ++s) {
    if (s > 0) {
      trace.exchange(numTiles * bucketBytes, machine);
      trace.sync(machine);
    }
    std::uint64_t slowest = 0;
    std::uint64_t macs = 0;
    for (std::size_t h = 0; h < numBuckets; ++h) {
      const std::uint64_t arrived = occ.arrivals[h * (steps + 1) + s];
      const std::uint64_t resident = occ.resident[(h + s) % numBuckets];
      slowest = std::max(slowest,
                         compute_cycles(arrived * area * nSlice, b, dtype,
                                        machine) +
                             resident * machine.meta_overhead_cycles);
      macs += arrived * area * plan.n;
    }
    trace.compute(slowest, macs);
    trace.sync(machine);
  }
  trace.propagation_steps = steps;

  if (plan.qk > 1) {
    trace.exchange((plan.qk - 1) * std::uint64_t{plan.m} * plan.n * bytes,
                   machine);
    trace.sync(machine);
    trace.reduce(ceil_div(max_of(plan.part_m) * b, plan.qk) * nSlice *
                     (plan.qk - 1),
                 dtype, machine);
  }

  trace.per_tile_macs.assign(numTiles, 0);
  for (std::size_t tile = 0; tile < numTiles; ++tile) {
    const auto p = plan.partition_of_tile(tile);
    trace.per_tile_macs[tile] =
        occ.home_count[plan.bucket_of(p.pm, p.pk)] * area * plan.part_n[p.pn];
  }
  trace.max_tile_bytes = dynamic_tile_bytes(plan, dtype, machine);
  trace.finish(2.0 * static_cast<double>(occ.total_blocks * area) *
                   static_cast<double>(plan.n),
               machine);
  return trace;
}

ExecutionTrace run_dense_baseline(std::size_t m, std::size_t k, std::size_t n,
                                  const MachineConfig &machine,
                                  DataType dtype) {
  if (m == 0 || k == 0 || n == 0) {
    throw Error("dense baseline dimensions must be positive");
  }
  const auto grid = choose_dense_grid(m, k, n, dtype, machine);
  auto trace = dense_schedule(m, k, n, grid, dtype, machine);
  const auto rows = balanced_sizes(m, grid.qm);
  const auto depth = balanced_sizes(k, grid.qk);
  const auto cols = balanced_sizes(n, grid.qn);
  for (const auto r : rows) {
    for (const auto d : depth) {
      for (const auto c : cols) {
        trace.per_tile_macs.push_back(std::uint64_t{r} * d * c);
      }
    }
  }
  trace.finish(flop_count(static_cast<double>(m), static_cast<double>(k),
                          static_cast<double>(n), 1.0),
               machine);
  return trace;
}

} // namespace tilespmm
