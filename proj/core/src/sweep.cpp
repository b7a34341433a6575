// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/sweep.hpp"

#include "tilespmm/dynamic_plan.hpp"
#include "tilespmm/error.hpp"
#include "tilespmm/execute.hpp"
#include "tilespmm/matrix.hpp"
#include "tilespmm/rng.hpp"
#include "tilespmm/schedule.hpp"
#include "tilespmm/static_plan.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <utility>

namespace tilespmm {

namespace {

constexpr std::uint64_t kMaskStream = 0x6d61736bULL;

bool block_fits(std::size_t m, std::size_t b) { return b <= m && m % b == 0; }

double tflops(double flops, std::uint64_t cycles, const MachineConfig &machine) {
  return flops / (static_cast<double>(cycles) / machine.clock_hz) / 1e12;
}

struct Measurement {
  bool skipped = true;
  std::uint64_t cycles = 0;
  double tflops = 0;
};

// Static cost straight from the split table, without materialising a plan.
Measurement measure_static(const BlockMask &mask,
                           const std::vector<std::size_t> &counts,
                           const StaticSplitTable &splits, std::size_t n,
                           DataType dtype, const MachineConfig &machine) {
  const auto grid = choose_static_grid(mask, splits, n, machine, dtype);
  const auto bounds = balanced_k_splits(counts, grid.qk);
  const std::size_t b = mask.block_size();
  const std::size_t area = b * b;
  const std::size_t nSlice = partition_sizes(n, grid.qn).back();
  const std::size_t bytes = machine.bytes_per_element(dtype);

  std::size_t footprint = 0;
  for (std::size_t pk = 0; pk < grid.qk; ++pk) {
    const std::size_t blocks =
        std::accumulate(counts.begin() + static_cast<std::ptrdiff_t>(bounds[pk]),
                        counts.begin() + static_cast<std::ptrdiff_t>(bounds[pk + 1]),
                        std::size_t{0});
    const std::size_t width = (bounds[pk + 1] - bounds[pk]) * b;
    footprint = std::max(footprint,
                         (blocks * area + width * nSlice + mask.m() * nSlice) *
                             bytes);
  }
  if (footprint > machine.tile_memory_bytes) {
    return {};
  }

  StaticWork work;
  work.m = mask.m();
  work.k = mask.k();
  work.n = n;
  work.b = b;
  work.qk = grid.qk;
  work.max_tile_blocks = splits.max_blocks[grid.qk - 1];
  work.max_n_slice = nSlice;
  work.total_blocks = mask.num_blocks();
  CycleTally tally(machine);
  static_schedule(tally, work, dtype, machine);
  const double flops = 2.0 * static_cast<double>(mask.num_blocks() * area) *
                       static_cast<double>(n);
  return {false, tally.total, tflops(flops, tally.total, machine)};
}

struct SparseJob {
  std::size_t m = 0;
  std::size_t b = 1;
  double d = 1;
  // [dtype][n][mode]
  std::vector<Measurement> results;
};

void run_sparse_job(SparseJob &job, const SweepConfig &config,
                    const MachineConfig &machine) {
  const std::size_t modes = config.sparse_modes.size();
  const std::size_t cells =
      config.dtype_list.size() * config.n_list.size() * modes;
  job.results.assign(cells, Measurement{});

  std::size_t count = 0;
  try {
    count = block_count_for_density(job.m, job.m, job.b, job.d);
  } catch (const Error &) {
    return; // no block selected: every row is a skip marker
  }
  const std::uint64_t stream =
      kMaskStream ^ (std::uint64_t{job.m} << 40) ^ (std::uint64_t{job.b} << 32) ^
      count;
  const auto mask = random_block_mask(job.m, job.m, job.b, job.d,
                                      derive_seed(config.seed, stream));
  const double dMax = density(mask);

  const bool wantStatic =
      std::find(config.sparse_modes.begin(), config.sparse_modes.end(),
                Mode::static_sparse) != config.sparse_modes.end();
  std::vector<std::size_t> counts;
  StaticSplitTable splits;
  if (wantStatic) {
    counts = mask.column_counts();
    splits = StaticSplitTable::build(mask, machine.tiles);
  }
  std::map<std::pair<std::size_t, std::size_t>, BucketOccupancy> occupancy;

  std::size_t cell = 0;
  for (const auto dtype : config.dtype_list) {
    for (const auto n : config.n_list) {
      for (const auto mode : config.sparse_modes) {
        auto &out = job.results[cell++];
        if (mode == Mode::static_sparse) {
          out = measure_static(mask, counts, splits, n, dtype, machine);
          continue;
        }
        const auto plan =
            plan_dynamic(job.m, job.m, n, job.b, dMax, machine, dtype);
        const auto key = std::pair{plan.qm, plan.qk};
        auto it = occupancy.find(key);
        if (it == occupancy.end()) {
          const auto buckets = encode_buckets(mask, {}, plan);
          it = occupancy.emplace(key, summarize_buckets(plan, buckets)).first;
        }
        const auto trace = trace_dynamic(plan, it->second, machine, dtype);
        if (trace.max_tile_bytes > machine.tile_memory_bytes) {
          continue;
        }
        out = {false, trace.total_cycles, trace.achieved_flops / 1e12};
      }
    }
  }
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads; rethrows the
// first failure.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) {
          return;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failureMutex);
          if (!failure) {
            failure = std::current_exception();
          }
          next.store(count);
        }
      }
    });
  }
  for (auto &w : workers) {
    w.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

} // namespace

void SweepConfig::validate() const {
  if (m_list.empty() || n_list.empty() || b_list.empty() || d_list.empty() ||
      dtype_list.empty()) {
    throw Error("sweep: every parameter list needs at least one value");
  }
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (m_list[i] == 0) {
      throw Error("sweep: m must be positive");
    }
    if (std::find(m_list.begin(), m_list.begin() + static_cast<std::ptrdiff_t>(i),
                  m_list[i]) != m_list.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw Error("sweep: m " + std::to_string(m_list[i]) + " is listed twice");
    }
  }
  for (const auto n : n_list) {
    if (n == 0) {
      throw Error("sweep: n must be positive");
    }
  }
  for (const auto b : b_list) {
    if (!is_supported_block_size(b)) {
      throw Error("sweep: unsupported block size " + std::to_string(b));
    }
  }
  for (const auto d : d_list) {
    if (!(d > 0 && d <= 1)) {
      throw Error("sweep: density " + format_number(d) + " is outside (0, 1]");
    }
  }
  for (const auto mode : sparse_modes) {
    if (mode == Mode::dense) {
      throw Error("sweep: dense rows are always produced; list only sparse "
                  "modes");
    }
  }
}

std::size_t sweep_row_count(const SweepConfig &config) {
  std::size_t rows = 0;
  for (const auto m : config.m_list) {
    const auto blocks = static_cast<std::size_t>(
        std::count_if(config.b_list.begin(), config.b_list.end(),
                      [m](std::size_t b) { return block_fits(m, b); }));
    rows += config.dtype_list.size() * config.n_list.size() *
            (1 + blocks * config.d_list.size() * config.sparse_modes.size());
  }
  return rows;
}

std::vector<SweepRecord> run_sweep(const SweepConfig &config,
                                   const MachineConfig &machine) {
  config.validate();
  machine.validate();

  // Dense rows per (m, dtype, n).
  std::vector<std::uint64_t> denseCycles(
      config.m_list.size() * config.dtype_list.size() * config.n_list.size());
  std::vector<double> denseTflops(denseCycles.size());
  parallel_for(denseCycles.size(), config.jobs, [&](std::size_t i) {
    const std::size_t ni = i % config.n_list.size();
    const std::size_t ti = (i / config.n_list.size()) % config.dtype_list.size();
    const std::size_t mi = i / (config.n_list.size() * config.dtype_list.size());
    const std::size_t m = config.m_list[mi];
    const auto trace = run_dense_baseline(m, m, config.n_list[ni], machine,
                                          config.dtype_list[ti]);
    denseCycles[i] = trace.total_cycles;
    denseTflops[i] = trace.achieved_flops / 1e12;
  });

  std::vector<SparseJob> jobs;
  for (const auto m : config.m_list) {
    for (const auto b : config.b_list) {
      if (!block_fits(m, b)) {
        continue;
      }
      for (const auto d : config.d_list) {
        jobs.push_back({m, b, d, {}});
      }
    }
  }
  // Largest masks first so the tail of a concurrent run stays short.
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto &a = jobs[x];
    const auto &c = jobs[y];
    return static_cast<double>(a.m * a.m) * a.d / static_cast<double>(a.b * a.b) >
           static_cast<double>(c.m * c.m) * c.d / static_cast<double>(c.b * c.b);
  });
  parallel_for(jobs.size(), config.jobs, [&](std::size_t i) {
    run_sparse_job(jobs[order[i]], config, machine);
  });

  std::vector<SweepRecord> records;
  records.reserve(sweep_row_count(config));
  std::size_t job = 0;
  for (std::size_t mi = 0; mi < config.m_list.size(); ++mi) {
    const std::size_t m = config.m_list[mi];
    const std::size_t firstJob = job;
    for (std::size_t ti = 0; ti < config.dtype_list.size(); ++ti) {
      const auto dtype = config.dtype_list[ti];
      for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
        const std::size_t n = config.n_list[ni];
        const std::size_t di =
            (mi * config.dtype_list.size() + ti) * config.n_list.size() + ni;
        SweepRecord dense;
        dense.m = m;
        dense.k = m;
        dense.n = n;
        dense.b = 1;
        dense.d = 1.0;
        dense.mode = Mode::dense;
        dense.dtype = dtype;
        dense.seed = config.seed;
        dense.total_cycles = denseCycles[di];
        dense.achieved_tflops = denseTflops[di];
        dense.speedup = 1.0;
        records.push_back(dense);

        for (std::size_t j = firstJob; j < jobs.size() && jobs[j].m == m; ++j) {
          for (std::size_t si = 0; si < config.sparse_modes.size(); ++si) {
            const auto &res =
                jobs[j].results[(ti * config.n_list.size() + ni) *
                                    config.sparse_modes.size() +
                                si];
            SweepRecord r;
            r.m = m;
            r.k = m;
            r.n = n;
            r.b = jobs[j].b;
            r.d = jobs[j].d;
            r.mode = config.sparse_modes[si];
            r.dtype = dtype;
            r.seed = config.seed;
            if (!res.skipped) {
              r.total_cycles = res.cycles;
              r.achieved_tflops = res.tflops;
              r.speedup = static_cast<double>(denseCycles[di]) /
                          static_cast<double>(res.cycles);
            }
            records.push_back(r);
          }
        }
      }
    }
    while (job < jobs.size() && jobs[job].m == m) {
      ++job;
    }
  }
  return records;
}

SweepSummary sweep(const SweepConfig &config, const MachineConfig &machine,
                   const std::filesystem::path &out) {
  config.validate();
  std::ofstream file(out, std::ios::binary);
  if (!file) {
    throw Error("cannot open '" + out.string() + "' for writing");
  }
  const auto records = run_sweep(config, machine);
  write_csv(file, records);
  if (!file.flush()) {
    throw Error("failed writing '" + out.string() + "'");
  }
  SweepSummary summary;
  summary.rows = records.size();
  summary.skipped = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(),
                    [](const SweepRecord &r) { return r.skipped(); }));
  return summary;
}

} // namespace tilespmm
