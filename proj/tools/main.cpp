// SPDX-License-Identifier: Apache-2.0
// tilespmm: run single SpMM cases, sweep the benchmark grid, and analyse
// sweep CSVs.
#include "tilespmm/analysis.hpp"
#include "tilespmm/dynamic_plan.hpp"
#include "tilespmm/error.hpp"
#include "tilespmm/execute.hpp"
#include "tilespmm/machine.hpp"
#include "tilespmm/matrix.hpp"
#include "tilespmm/records.hpp"
#include "tilespmm/rng.hpp"
#include "tilespmm/static_plan.hpp"
#include "tilespmm/sweep.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace tilespmm;

constexpr double kVerifyTolerance = 1e-9;

MachineConfig machine_from(const std::string &path) {
  return path.empty() ? MachineConfig{} : load_machine_config(path);
}

void print_trace(const ExecutionTrace &trace, const MachineConfig &machine,
                 DataType dtype) {
  std::cout << "total_cycles: " << trace.total_cycles << '\n'
            << "runtime_us: "
            << format_number(static_cast<double>(trace.total_cycles) /
                             machine.clock_hz * 1e6)
            << '\n'
            << "achieved_tflops: " << format_number(trace.achieved_flops / 1e12)
            << '\n'
            << "peak_tflops: " << format_number(machine.peak_flops(dtype) / 1e12)
            << '\n'
            << "propagation_steps: " << trace.propagation_steps << '\n'
            << "max_tile_bytes: " << trace.max_tile_bytes << '\n';
  for (const auto kind : {PhaseKind::exchange, PhaseKind::sync,
                          PhaseKind::compute, PhaseKind::reduce}) {
    std::cout << "phase." << to_string(kind) << ": " << trace.count(kind)
              << " x, " << trace.cycles_of(kind) << " cycles\n";
  }
}

struct SpmmArgs {
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t block = 1;
  std::string density;
  std::string mode;
  std::string dtype;
  std::uint64_t seed = 0;
  std::string machine;
  bool verify = false;
};

int run_spmm(const SpmmArgs &args) {
  const auto machine = machine_from(args.machine);
  const auto dtype = parse_data_type(args.dtype);
  const auto mode = parse_mode(args.mode);
  const double d = parse_density(args.density);

  const auto dense = run_dense_baseline(args.m, args.k, args.n, machine, dtype);
  if (mode == Mode::dense) {
    print_trace(dense, machine, dtype);
    std::cout << "speedup: 1\n";
    if (args.verify) {
      std::cout << "verify: skipped (dense mode is cost only)\n";
    }
    return 0;
  }

  const auto mask = random_block_mask(args.m, args.k, args.block, d, args.seed);
  std::cout << "blocks: " << mask.num_blocks() << '\n'
            << "density: " << format_number(density(mask)) << '\n';

  ExecutionTrace trace;
  std::optional<SpmmResult> run;
  double error = 0;
  if (mode == Mode::static_sparse) {
    const auto grid = choose_static_grid(mask, args.n, machine, dtype);
    const auto plan = build_static_plan(mask, grid.qk, grid.qn, args.n, machine);
    std::cout << "grid: qk=" << plan.qk << " qn=" << plan.qn << '\n';
    trace = trace_static(plan, machine, dtype);
    if (args.verify) {
      const auto s = random_block_sparse(mask, args.seed);
      const auto x = random_dense(args.k, args.n,
                                  derive_seed(args.seed, kInputStream));
      run = run_static(plan, s, x, machine, dtype);
      error = max_relative_error(run->y, spmm_oracle(s, x));
    }
  } else {
    const auto plan =
        plan_dynamic(args.m, args.k, args.n, args.block, density(mask), machine,
                     dtype);
    std::cout << "grid: qm=" << plan.qm << " qk=" << plan.qk
              << " qn=" << plan.qn << '\n'
              << "bucket_blocks: " << plan.bucket_block_capacity() << '\n';
    if (args.verify) {
      const auto s = random_block_sparse(mask, args.seed);
      const auto x = random_dense(args.k, args.n,
                                  derive_seed(args.seed, kInputStream));
      const auto buckets = encode_buckets(mask, s.values(), plan);
      run = run_dynamic(plan, buckets, x, machine, dtype);
      error = max_relative_error(run->y, spmm_oracle(s, x));
      trace = trace_dynamic(plan, buckets, machine, dtype);
    } else {
      trace = trace_dynamic(plan, encode_buckets(mask, {}, plan), machine, dtype);
    }
  }
  print_trace(trace, machine, dtype);
  std::cout << "dense_cycles: " << dense.total_cycles << '\n'
            << "speedup: "
            << format_number(static_cast<double>(dense.total_cycles) /
                             static_cast<double>(trace.total_cycles))
            << '\n';
  if (trace.max_tile_bytes > machine.tile_memory_bytes) {
    std::cout << "warning: tile footprint exceeds tile memory ("
              << machine.tile_memory_bytes << " bytes)\n";
  }

  if (!run) {
    return 0;
  }
  const bool traceMatches = run->trace.total_cycles == trace.total_cycles;
  const bool ok = error <= kVerifyTolerance && run->audit.violations == 0 &&
                  traceMatches;
  std::cout << "max_relative_error: " << format_number(error) << '\n'
            << "bsp_reads: " << run->audit.reads << '\n'
            << "bsp_violations: " << run->audit.violations << '\n'
            << "trace_matches_model: " << (traceMatches ? "yes" : "no") << '\n'
            << "verify: " << (ok ? "pass" : "FAIL") << '\n';
  return ok ? 0 : 2;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Block-sparse SpMM planning and cost simulation on a tile "
               "machine"};
  app.require_subcommand(1);

  SpmmArgs spmm;
  auto *spmmCmd = app.add_subcommand("spmm", "Plan and cost one SpMM");
  spmmCmd->add_option("--m", spmm.m, "Rows of the sparse operand")->required();
  spmmCmd->add_option("--k", spmm.k, "Columns of the sparse operand")->required();
  spmmCmd->add_option("--n", spmm.n, "Columns of the dense operand")->required();
  spmmCmd->add_option("--block", spmm.block, "Block size (1, 4, 8, 16)")
      ->required();
  spmmCmd->add_option("--density", spmm.density, "Density, e.g. 1/16 or 0.0625")
      ->required();
  spmmCmd->add_option("--mode", spmm.mode, "dense, static or dynamic")
      ->required()
      ->check(CLI::IsMember({"dense", "static", "dynamic"}));
  spmmCmd->add_option("--dtype", spmm.dtype, "fp16 or fp32")
      ->required()
      ->check(CLI::IsMember({"fp16", "fp32"}));
  spmmCmd->add_option("--seed", spmm.seed, "Pattern and value seed")->required();
  spmmCmd->add_option("--machine", spmm.machine, "Machine config file");
  spmmCmd->add_flag("--verify", spmm.verify,
                    "Simulate numerically and compare with the reference");

  SweepConfig sweepConfig;
  std::string sweepOut;
  std::string sweepMachine;
  std::vector<std::string> dList;
  std::vector<std::string> dtypeList;
  auto *sweepCmd = app.add_subcommand("sweep", "Sweep the benchmark grid to CSV");
  sweepCmd->add_option("--out", sweepOut, "Output CSV")->required();
  sweepCmd->add_option("--machine", sweepMachine, "Machine config file");
  sweepCmd->add_option("--m-list", sweepConfig.m_list, "m = k values")
      ->delimiter(',');
  sweepCmd->add_option("--n-list", sweepConfig.n_list, "Batch sizes")
      ->delimiter(',');
  sweepCmd->add_option("--b-list", sweepConfig.b_list, "Block sizes")
      ->delimiter(',');
  sweepCmd->add_option("--d-list", dList, "Densities")->delimiter(',');
  sweepCmd->add_option("--dtype-list", dtypeList, "Data types")->delimiter(',');
  sweepCmd->add_option("--seed", sweepConfig.seed, "Sweep seed");
  sweepCmd->add_option("--jobs", sweepConfig.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);

  std::string fitIn;
  std::string fitMode = "static";
  std::string fitDtype = "fp16";
  auto *fitCmd = app.add_subcommand("fit", "Fit the power-law speedup model");
  fitCmd->add_option("--in", fitIn, "Sweep CSV")->required();
  fitCmd->add_option("--mode", fitMode, "static or dynamic")
      ->check(CLI::IsMember({"static", "dynamic"}));
  fitCmd->add_option("--dtype", fitDtype, "fp16 or fp32")
      ->check(CLI::IsMember({"fp16", "fp32"}));

  std::string gridIn;
  std::string gridOut;
  std::string gridDtype = "fp16";
  auto *gridCmd = app.add_subcommand("grid", "Static/dense speedup grid CSV");
  gridCmd->add_option("--in", gridIn, "Sweep CSV")->required();
  gridCmd->add_option("--out", gridOut, "Grid CSV")->required();
  gridCmd->add_option("--dtype", gridDtype, "fp16 or fp32")
      ->check(CLI::IsMember({"fp16", "fp32"}));

  std::string crossIn;
  std::size_t crossM = 0;
  std::size_t crossBlock = 0;
  std::string crossDtype;
  auto *crossCmd =
      app.add_subcommand("crossover", "Density where static beats dense");
  crossCmd->add_option("--in", crossIn, "Sweep CSV")->required();
  crossCmd->add_option("--m", crossM, "m = k")->required();
  crossCmd->add_option("--block", crossBlock, "Block size")->required();
  crossCmd->add_option("--dtype", crossDtype, "fp16 or fp32")
      ->required()
      ->check(CLI::IsMember({"fp16", "fp32"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*spmmCmd) {
      return run_spmm(spmm);
    }
    if (*sweepCmd) {
      if (!dList.empty()) {
        sweepConfig.d_list.clear();
        for (const auto &d : dList) {
          sweepConfig.d_list.push_back(parse_density(d));
        }
      }
      if (!dtypeList.empty()) {
        sweepConfig.dtype_list.clear();
        for (const auto &t : dtypeList) {
          sweepConfig.dtype_list.push_back(parse_data_type(t));
        }
      }
      const auto summary =
          sweep(sweepConfig, machine_from(sweepMachine), sweepOut);
      std::cout << "rows: " << summary.rows << '\n'
                << "records: " << summary.rows - summary.skipped << '\n'
                << "skipped: " << summary.skipped << '\n';
      return 0;
    }
    if (*fitCmd) {
      const auto fit = fit_power_law(load_records(fitIn), parse_mode(fitMode),
                                     parse_data_type(fitDtype));
      std::cout << "c: " << format_number(fit.c) << '\n'
                << "alpha: " << format_number(fit.alpha) << '\n'
                << "beta: " << format_number(fit.beta) << '\n'
                << "gamma: " << format_number(fit.gamma) << '\n'
                << "residual_rms: " << format_number(fit.residual_rms) << '\n'
                << "samples: " << fit.samples << '\n';
      return 0;
    }
    if (*gridCmd) {
      const auto grid =
          speedup_grid(load_records(gridIn), parse_data_type(gridDtype));
      std::ofstream out(gridOut, std::ios::binary);
      if (!out) {
        throw Error("cannot open '" + gridOut + "' for writing");
      }
      write_grid_csv(out, grid);
      std::cout << "rows: " << grid.rows.size()
                << "\ncols: " << grid.cols.size() << '\n';
      return 0;
    }
    if (*crossCmd) {
      const auto d = crossover_density(load_records(crossIn), crossM,
                                       crossBlock, parse_data_type(crossDtype));
      std::cout << "crossover_density: " << (d ? format_number(*d) : "none")
                << '\n';
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
