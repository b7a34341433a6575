// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/machine.hpp"

#include "tilespmm/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tilespmm {

namespace {

std::size_t block_slot(std::size_t b) {
  switch (b) {
  case 1:
    return 0;
  case 4:
    return 1;
  case 8:
    return 2;
  case 16:
    return 3;
  default:
    throw Error("no MAC rate configured for block size " + std::to_string(b));
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T> T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto *end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error("machine config: bad value '" + std::string(v) + "' for " +
                std::string(key));
  }
  return out;
}

constexpr const char *kMacKeys[2][4] = {
    {"macs_fp16_b1", "macs_fp16_b4", "macs_fp16_b8", "macs_fp16_b16"},
    {"macs_fp32_b1", "macs_fp32_b4", "macs_fp32_b8", "macs_fp32_b16"}};

} // namespace

std::string_view to_string(DataType dtype) {
  return dtype == DataType::fp16 ? "fp16" : "fp32";
}

DataType parse_data_type(std::string_view text) {
  if (text == "fp16") {
    return DataType::fp16;
  }
  if (text == "fp32") {
    return DataType::fp32;
  }
  throw Error("unknown data type '" + std::string(text) +
              "' (expected fp16 or fp32)");
}

std::uint64_t MachineConfig::macs_per_cycle(DataType dtype,
                                            std::size_t b) const {
  return macs_per_cycle_table[static_cast<std::size_t>(dtype)][block_slot(b)];
}

std::size_t MachineConfig::bytes_per_element(DataType dtype) const {
  return dtype == DataType::fp16 ? 2 : 4;
}

double MachineConfig::peak_flops(DataType dtype) const {
  return static_cast<double>(tiles) *
         static_cast<double>(dense_macs_per_cycle(dtype)) * 2.0 * clock_hz;
}

void MachineConfig::validate() const {
  if (tiles == 0 || tile_memory_bytes == 0 || !(clock_hz > 0) ||
      exchange_bytes_per_cycle == 0) {
    throw Error("machine config: tiles, tile_memory_bytes, clock_hz and "
                "exchange_bytes_per_cycle must be positive");
  }
  if (!(headroom >= 1.0)) {
    throw Error("machine config: headroom must be at least 1");
  }
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t s = 0; s < 4; ++s) {
      const auto rate = macs_per_cycle_table[t][s];
      if (rate == 0) {
        throw Error(std::string("machine config: ") + kMacKeys[t][s] +
                    " must be positive");
      }
      if (s > 0 && rate < macs_per_cycle_table[t][s - 1]) {
        throw Error(std::string("machine config: ") + kMacKeys[t][s] +
                    " is lower than the rate of a smaller block size");
      }
    }
  }
  for (std::size_t s = 0; s < 4; ++s) {
    if (macs_per_cycle_table[0][s] < macs_per_cycle_table[1][s]) {
      throw Error(std::string("machine config: ") + kMacKeys[0][s] +
                  " is lower than " + kMacKeys[1][s]);
    }
  }
}

MachineConfig parse_machine_config(std::istream &in) {
  MachineConfig cfg;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) {
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error("machine config line " + std::to_string(lineNo) +
                  ": expected 'key = value'");
    }
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));

    bool matched = true;
    if (key == "tiles") {
      cfg.tiles = parse_number<std::size_t>(key, value);
    } else if (key == "tile_memory_bytes") {
      cfg.tile_memory_bytes = parse_number<std::size_t>(key, value);
    } else if (key == "clock_hz") {
      cfg.clock_hz = parse_number<double>(key, value);
    } else if (key == "exchange_bytes_per_cycle") {
      cfg.exchange_bytes_per_cycle = parse_number<std::uint64_t>(key, value);
    } else if (key == "sync_cycles") {
      cfg.sync_cycles = parse_number<std::uint64_t>(key, value);
    } else if (key == "meta_overhead_cycles") {
      cfg.meta_overhead_cycles = parse_number<std::uint64_t>(key, value);
    } else if (key == "headroom") {
      cfg.headroom = parse_number<double>(key, value);
    } else {
      matched = false;
      for (std::size_t t = 0; t < 2 && !matched; ++t) {
        for (std::size_t s = 0; s < 4; ++s) {
          if (key == kMacKeys[t][s]) {
            cfg.macs_per_cycle_table[t][s] =
                parse_number<std::uint64_t>(key, value);
            matched = true;
            break;
          }
        }
      }
    }
    if (!matched) {
      throw Error("machine config line " + std::to_string(lineNo) +
                  ": unknown key '" + std::string(key) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

MachineConfig load_machine_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open machine config " + path.string());
  }
  return parse_machine_config(in);
}

void write_machine_config(std::ostream &out, const MachineConfig &machine) {
  std::ostringstream clock;
  clock.precision(17);
  clock << machine.clock_hz;
  std::ostringstream headroom;
  headroom.precision(17);
  headroom << machine.headroom;
  out << "tiles = " << machine.tiles << '\n'
      << "tile_memory_bytes = " << machine.tile_memory_bytes << '\n'
      << "clock_hz = " << clock.str() << '\n'
      << "exchange_bytes_per_cycle = " << machine.exchange_bytes_per_cycle
      << '\n'
      << "sync_cycles = " << machine.sync_cycles << '\n';
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t s = 0; s < 4; ++s) {
      out << kMacKeys[t][s] << " = " << machine.macs_per_cycle_table[t][s]
          << '\n';
    }
  }
  out << "meta_overhead_cycles = " << machine.meta_overhead_cycles << '\n'
      << "headroom = " << headroom.str() << '\n';
}

} // namespace tilespmm
