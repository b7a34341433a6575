// SPDX-License-Identifier: Apache-2.0
// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
#include "tilespmm/analysis.hpp"
#include "tilespmm/dynamic_plan.hpp"
#include "tilespmm/error.hpp"
#include "tilespmm/execute.hpp"
#include "tilespmm/matrix.hpp"
#include "tilespmm/rng.hpp"
#include "tilespmm/static_plan.hpp"
#include "tilespmm/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace tilespmm;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct GridCase {
  std::size_t m, n, b;
  double d;
  std::uint64_t seed;
  DataType dtype;
  std::uint64_t static_cycles;
  std::uint64_t dynamic_cycles;
};

// Shared by criteria 1 and 4.
std::vector<GridCase> g_grid;
std::size_t g_gridNotApplicable = 0;

std::string fmt(double v) { return format_number(v); }

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const MachineConfig machine;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0;
  std::size_t violations = 0;
  std::string firstFailure;
  for (std::size_t m : {8U, 16U, 64U, 128U}) {
    for (std::size_t n : {4U, 16U}) {
      for (std::size_t b : kBlockSizes) {
        if (b > m || m % b != 0) {
          continue;
        }
        for (double d : {0.25, 0.125, 0.0625, 1.0}) {
          for (std::uint64_t seed : {1U, 2U, 3U}) {
            std::optional<BlockMask> mask;
            try {
              mask = random_block_mask(m, m, b, d, seed);
            } catch (const Error &) {
              ++g_gridNotApplicable; // density selects no block
              continue;
            }
            const auto s = random_block_sparse(*mask, seed);
            const auto x = random_dense(m, n, derive_seed(seed, kInputStream));
            const auto ref = spmm_oracle(s, x);
            for (auto dtype : {DataType::fp16, DataType::fp32}) {
              const auto g = choose_static_grid(s.mask(), n, machine, dtype);
              const auto sp = build_static_plan(s.mask(), g.qk, g.qn, n, machine);
              const auto dp =
                  plan_dynamic(m, m, n, b, density(s.mask()), machine, dtype);
              const auto buckets = encode_buckets(s.mask(), s.values(), dp);
              const auto rs = run_static(sp, s, x, machine, dtype);
              const auto rd = run_dynamic(dp, buckets, x, machine, dtype);
              const double es = max_relative_error(rs.y, ref);
              const double ed = max_relative_error(rd.y, ref);
              worst = std::max({worst, es, ed});
              violations += rs.audit.violations + rd.audit.violations;
              ++cases;
              if (es > 1e-9 || ed > 1e-9) {
                if (failures++ == 0) {
                  firstFailure = " first failure m=" + std::to_string(m) +
                                 " n=" + std::to_string(n) +
                                 " b=" + std::to_string(b) + " d=" + fmt(d) +
                                 " seed=" + std::to_string(seed);
                }
              }
              g_grid.push_back({m, n, b, d, seed, dtype, rs.trace.total_cycles,
                                rd.trace.total_cycles});
            }
          }
        }
      }
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  Outcome out;
  out.pass = failures == 0 && violations == 0 && seconds < 60.0 && cases > 0;
  out.detail = std::to_string(cases) + " runs (static+dynamic, fp16+fp32), " +
               std::to_string(g_gridNotApplicable) +
               " grid points select no block and are not applicable; max rel "
               "err " +
               fmt(worst) + "; BSP violations " + std::to_string(violations) +
               "; " + fmt(seconds) + " s" + firstFailure;
  return out;
}

Outcome flop_formula() {
  SplitMix64 gen(2);
  std::size_t mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const auto m = 1 + gen.below(8192);
    const auto k = 1 + gen.below(8192);
    const auto n = 1 + gen.below(65536);
    // Dyadic densities keep 2mknd exact in double arithmetic.
    const auto shift = gen.below(6);
    const double d = 1.0 / static_cast<double>(1ULL << shift);
    const auto exact = (2ULL * m * k * n) >> shift;
    const bool divisible = ((2ULL * m * k * n) & ((1ULL << shift) - 1)) == 0;
    const double expected =
        divisible ? static_cast<double>(exact)
                  : static_cast<double>(2ULL * m * k * n) * d;
    if (flop_count(static_cast<double>(m), static_cast<double>(k),
                   static_cast<double>(n), d) != expected) {
      ++mismatches;
    }
  }
  const double spot = flop_count(4096, 4096, 4096, 1.0 / 16);
  Outcome out;
  out.pass = mismatches == 0 && spot == 8589934592.0;
  out.detail = "100 random tuples, " + std::to_string(mismatches) +
               " mismatches; (4096,4096,4096,1/16) -> " +
               std::to_string(static_cast<std::uint64_t>(spot));
  return out;
}

Outcome propagation_bounds() {
  const MachineConfig machine;
  Outcome out;
  // Balanced: a checkerboard of blocks fills each partition equally.
  std::size_t balancedMax = 0;
  for (std::size_t q : {1U, 2U, 4U}) {
    std::vector<BlockCoord> coords;
    for (std::uint32_t r = 0; r < 8; ++r) {
      for (std::uint32_t c = 0; c < 8; ++c) {
        if ((r + c) % 2 == 0) {
          coords.push_back({r, c});
        }
      }
    }
    const auto s = random_block_sparse(BlockMask(32, 32, 4, coords), q);
    const auto plan =
        make_dynamic_plan(32, 32, 8, 4, density(s.mask()), q, q, 1, machine);
    const auto r = run_dynamic(plan, encode_buckets(s.mask(), s.values(), plan),
                               random_dense(32, 8, q), machine, DataType::fp16);
    balancedMax = std::max(balancedMax, r.trace.propagation_steps);
  }
  // Adversarial: every block in partition (0, 0) of a 2x2 grid.
  std::vector<BlockCoord> corner;
  for (std::uint32_t r = 0; r < 8; ++r) {
    for (std::uint32_t c = 0; c < 8; ++c) {
      corner.push_back({r, c});
    }
  }
  const auto adv = random_block_sparse(BlockMask(16, 16, 1, corner), 1);
  const auto advPlan =
      make_dynamic_plan(16, 16, 4, 1, density(adv.mask()), 2, 2, 1, machine);
  const auto advRun =
      run_dynamic(advPlan, encode_buckets(adv.mask(), adv.values(), advPlan),
                  random_dense(16, 4, 2), machine, DataType::fp16);

  SplitMix64 gen(99);
  std::size_t over = 0;
  std::size_t worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t b = kBlockSizes[gen.below(4)];
    const std::size_t rows = 2 + gen.below(8);
    const std::size_t cols = 2 + gen.below(8);
    std::vector<BlockCoord> coords;
    const auto hot = gen.below(rows);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) {
        if (gen.below(100) < (r == hot ? 95U : 15U)) {
          coords.push_back({r, c});
        }
      }
    }
    if (coords.empty()) {
      coords.push_back({0, 0});
    }
    const auto s =
        random_block_sparse(BlockMask(rows * b, cols * b, b, coords), gen.next());
    const auto qm = 1 + gen.below(rows);
    const auto qk = 1 + gen.below(cols);
    const auto plan = make_dynamic_plan(rows * b, cols * b, 3, b,
                                        density(s.mask()), qm, qk, 1, machine);
    const auto r = run_dynamic(plan, encode_buckets(s.mask(), s.values(), plan),
                               random_dense(cols * b, 3, gen.next()), machine,
                               DataType::fp16);
    worst = std::max(worst, r.trace.propagation_steps);
    if (r.trace.propagation_steps > qm * qk) {
      ++over;
    }
  }
  out.pass = balancedMax == 0 && advRun.trace.propagation_steps == 3 && over == 0;
  out.detail = "balanced steps " + std::to_string(balancedMax) +
               ", all-in-one-partition (qm*qk=4) steps " +
               std::to_string(advRun.trace.propagation_steps) +
               ", 200 random cases over bound " + std::to_string(over) +
               " (max steps seen " + std::to_string(worst) + ")";
  return out;
}

Outcome static_dominance() {
  std::size_t violations = 0;
  std::string first;
  double worstRatio = 0;
  for (const auto &c : g_grid) {
    worstRatio = std::max(worstRatio, static_cast<double>(c.static_cycles) /
                                          static_cast<double>(c.dynamic_cycles));
    if (c.static_cycles > c.dynamic_cycles && violations++ == 0) {
      first = "; first violation m=" + std::to_string(c.m) +
              " n=" + std::to_string(c.n) + " b=" + std::to_string(c.b) +
              " d=" + fmt(c.d) + " seed=" + std::to_string(c.seed) + " " +
              std::string(to_string(c.dtype)) + " static " +
              std::to_string(c.static_cycles) + " > dynamic " +
              std::to_string(c.dynamic_cycles);
    }
  }
  Outcome out;
  out.pass = violations == 0 && !g_grid.empty();
  out.detail = std::to_string(g_grid.size()) + " configurations, " +
               std::to_string(violations) +
               " with static > dynamic; max static/dynamic cycle ratio " +
               fmt(worstRatio) + first;
  return out;
}

std::vector<SweepRecord> g_trendSweep;

Outcome cost_model_trends() {
  SweepConfig config;
  config.dtype_list = {DataType::fp16};
  config.sparse_modes = {Mode::static_sparse};
  g_trendSweep = run_sweep(config, MachineConfig{});
  std::map<std::tuple<std::size_t, std::size_t, double>, double> speedup;
  for (const auto &r : best_over_batch(g_trendSweep)) {
    if (r.mode == Mode::static_sparse) {
      speedup[{r.m, r.b, r.d}] = *r.speedup;
    }
  }
  std::size_t breaksD = 0, breaksB = 0, breaksM = 0, missing = 0;
  std::string first;
  auto get = [&](std::size_t m, std::size_t b, double d) -> std::optional<double> {
    const auto it = speedup.find({m, b, d});
    if (it == speedup.end()) {
      ++missing;
      return std::nullopt;
    }
    return it->second;
  };
  auto note = [&](const std::string &what) {
    if (first.empty()) {
      first = "; first break " + what;
    }
  };
  const auto &ms = config.m_list;
  const auto &bs = config.b_list;
  auto ds = config.d_list;
  std::sort(ds.begin(), ds.end()); // ascending density
  for (auto m : ms) {
    for (auto b : bs) {
      for (std::size_t i = 0; i + 1 < ds.size(); ++i) {
        const auto lo = get(m, b, ds[i]);
        const auto hi = get(m, b, ds[i + 1]);
        if (lo && hi && *hi > *lo) {
          ++breaksD;
          note("d at m=" + std::to_string(m) + " b=" + std::to_string(b) +
               " d=" + fmt(ds[i + 1]) + ": " + fmt(*hi) + " > " + fmt(*lo));
        }
      }
    }
  }
  for (auto m : ms) {
    for (auto d : ds) {
      for (std::size_t i = 0; i + 1 < bs.size(); ++i) {
        const auto lo = get(m, bs[i], d);
        const auto hi = get(m, bs[i + 1], d);
        if (lo && hi && *hi < *lo) {
          ++breaksB;
          note("b at m=" + std::to_string(m) + " d=" + fmt(d) +
               " b=" + std::to_string(bs[i + 1]) + ": " + fmt(*hi) + " < " +
               fmt(*lo));
        }
      }
    }
  }
  for (std::size_t i = 0; i + 1 < ms.size(); ++i) {
    const auto lo = get(ms[i], 16, 1.0 / 16);
    const auto hi = get(ms[i + 1], 16, 1.0 / 16);
    if (lo && hi && *hi < *lo) {
      ++breaksM;
      note("m at m=" + std::to_string(ms[i + 1]) + ": " + fmt(*hi) + " < " +
           fmt(*lo));
    }
  }
  std::ostringstream mRow;
  for (auto m : ms) {
    if (const auto v = speedup.find({m, 16, 1.0 / 16}); v != speedup.end()) {
      mRow << (mRow.tellp() > 0 ? " " : "") << fmt(v->second);
    }
  }
  Outcome out;
  out.pass = breaksD == 0 && breaksB == 0 && breaksM == 0 && missing == 0;
  out.detail = "fp16 best-over-batch static speedup: breaks in d " +
               std::to_string(breaksD) + ", in b " + std::to_string(breaksB) +
               ", in m " + std::to_string(breaksM) + ", missing cells " +
               std::to_string(missing) + "; b=16 d=1/16 over m: " + mRow.str() +
               first;
  return out;
}

Outcome power_law_recovery() {
  const double c = 0.0013, alpha = 0.59, beta = -0.54, gamma = 0.50;
  std::vector<PowerLawSample> clean;
  for (double m : {256.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0}) {
    for (double d : {0.25, 0.125, 0.0625, 0.03125}) {
      for (double b : {1.0, 4.0, 8.0, 16.0}) {
        clean.push_back({m, d, b,
                         c * std::pow(m, alpha) * std::pow(d, beta) *
                             std::pow(b, gamma)});
      }
    }
  }
  const auto exact = fit_power_law(clean);
  const double exactErr =
      std::max({std::abs(exact.c - c), std::abs(exact.alpha - alpha),
                std::abs(exact.beta - beta), std::abs(exact.gamma - gamma)});

  auto noisy = clean;
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (auto &s : noisy) {
    s.ratio *= std::exp(noise(rng));
  }
  const auto rough = fit_power_law(noisy);
  const double noisyErr =
      std::max({std::abs(rough.alpha - alpha), std::abs(rough.beta - beta),
                std::abs(rough.gamma - gamma)});

  const auto sweepFit = fit_power_law(g_trendSweep);
  Outcome out;
  out.pass = exactErr <= 1e-9 && noisyErr <= 0.05 && sweepFit.alpha > 0 &&
             sweepFit.beta < 0 && sweepFit.gamma > 0;
  out.detail = "noiseless max param err " + fmt(exactErr) +
               "; 5% noise max exponent err " + fmt(noisyErr) +
               "; sweep fit c=" + fmt(sweepFit.c) + " alpha=" +
               fmt(sweepFit.alpha) + " beta=" + fmt(sweepFit.beta) +
               " gamma=" + fmt(sweepFit.gamma) + " rms=" +
               fmt(sweepFit.residual_rms);
  return out;
}

Outcome dense_sanity() {
  const MachineConfig machine;
  const auto big = run_dense_baseline(4096, 4096, 4096, machine, DataType::fp16);
  const auto thin = run_dense_baseline(4096, 4096, 4, machine, DataType::fp16);
  const double peak = machine.peak_flops(DataType::fp16);
  Outcome out;
  out.pass = big.achieved_flops >= 0.9 * peak &&
             thin.achieved_flops < big.achieved_flops;
  out.detail = "4096^3 fp16 at " + fmt(100 * big.achieved_flops / peak) +
               "% of peak; n=4 at " + fmt(100 * thin.achieved_flops / peak) +
               "%";
  return out;
}

Outcome determinism() {
  SweepConfig config;
  config.m_list = {256, 1024};
  config.n_list = {4, 256, 4096};
  config.seed = 17;
  auto csv = [](const std::vector<SweepRecord> &records) {
    std::ostringstream out;
    write_csv(out, records);
    return out.str();
  };
  const auto first = csv(run_sweep(config, MachineConfig{}));
  const auto second = csv(run_sweep(config, MachineConfig{}));
  config.jobs = 4;
  const auto parallel = csv(run_sweep(config, MachineConfig{}));
  Outcome out;
  out.pass = first == second && first == parallel;
  out.detail = std::to_string(first.size()) + " CSV bytes; rerun " +
               (first == second ? "identical" : "DIFFERENT") +
               ", 4-thread run " + (first == parallel ? "identical" : "DIFFERENT");
  return out;
}

Outcome partition_balance() {
  SplitMix64 gen(4242);
  std::size_t checked = 0;
  std::size_t breaks = 0;
  while (checked < 100) {
    const std::size_t b = kBlockSizes[gen.below(4)];
    const std::size_t m = b * (1 + gen.below(32));
    const std::size_t k = b * (1 + gen.below(64));
    const double d = 0.02 + 0.98 * static_cast<double>(gen.below(1000)) / 1000;
    std::optional<BlockMask> mask;
    try {
      mask = random_block_mask(m, k, b, d, gen.next());
    } catch (const Error &) {
      continue;
    }
    const auto counts = mask->column_counts();
    const auto qk = 1 + gen.below(counts.size());
    const auto bounds = balanced_k_splits(counts, qk);
    std::size_t maxPart = 0;
    for (std::size_t p = 0; p < qk; ++p) {
      maxPart = std::max(maxPart, std::accumulate(counts.begin() + bounds[p],
                                                  counts.begin() + bounds[p + 1],
                                                  std::size_t{0}));
    }
    const std::size_t maxCol = *std::max_element(counts.begin(), counts.end());
    const std::size_t target = (mask->num_blocks() + qk - 1) / qk;
    if (maxPart > target + maxCol - 1) {
      ++breaks;
    }
    ++checked;
  }
  Outcome out;
  out.pass = breaks == 0;
  out.detail = std::to_string(checked) + " random masks, " +
               std::to_string(breaks) + " exceed ceil(total/qk) + maxcol - 1";
  return out;
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"flop formula", flop_formula},
      {"propagation bounds", propagation_bounds},
      {"static dominance", static_dominance},
      {"cost-model trends", cost_model_trends},
      {"power-law recovery", power_law_recovery},
      {"dense baseline sanity", dense_sanity},
      {"determinism", determinism},
      {"partition balance", partition_balance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception &e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu [%s] %s: %s\n", i + 1, out.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), out.detail.c_str());
    std::fflush(stdout);
    failed += out.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
