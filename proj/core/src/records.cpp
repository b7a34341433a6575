// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/records.hpp"

#include "tilespmm/error.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tilespmm {

namespace {

constexpr std::string_view kMissing = "NA";

template <typename T> T parse_field(std::string_view text, std::string_view name,
                                    std::size_t line) {
  T value{};
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error("line " + std::to_string(line) + ": bad " + std::string(name) +
                " '" + std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view text, std::string_view name,
                    std::size_t line) {
  // from_chars for double is missing on older libstdc++.
  std::string copy(text);
  char *end = nullptr;
  const double value = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) {
    throw Error("line " + std::to_string(line) + ": bad " + std::string(name) +
                " '" + copy + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return fields;
}

} // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
  case Mode::dense:
    return "dense";
  case Mode::static_sparse:
    return "static";
  case Mode::dynamic_sparse:
    return "dynamic";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  if (text == "dense") {
    return Mode::dense;
  }
  if (text == "static") {
    return Mode::static_sparse;
  }
  if (text == "dynamic") {
    return Mode::dynamic_sparse;
  }
  throw Error("unknown mode '" + std::string(text) +
              "' (expected dense, static or dynamic)");
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

void write_csv(std::ostream &out, std::span<const SweepRecord> records) {
  out << kCsvHeader << '\n';
  for (const auto &r : records) {
    out << r.m << ',' << r.k << ',' << r.n << ',' << r.b << ','
        << format_number(r.d) << ',' << to_string(r.mode) << ','
        << to_string(r.dtype) << ',' << r.seed << ',';
    if (r.skipped()) {
      out << kMissing << ',' << kMissing << ',' << kMissing << '\n';
      continue;
    }
    out << *r.total_cycles << ',' << format_number(r.achieved_tflops.value_or(0))
        << ',';
    if (r.speedup) {
      out << format_number(*r.speedup);
    } else {
      out << kMissing;
    }
    out << '\n';
  }
}

std::vector<SweepRecord> read_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error("empty CSV input");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != kCsvHeader) {
    throw Error("unexpected CSV header '" + line + "'");
  }
  std::vector<SweepRecord> records;
  std::size_t lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto f = split(line);
    if (f.size() != 11) {
      throw Error("line " + std::to_string(lineNo) + ": expected 11 fields, got " +
                  std::to_string(f.size()));
    }
    SweepRecord r;
    r.m = parse_field<std::size_t>(f[0], "m", lineNo);
    r.k = parse_field<std::size_t>(f[1], "k", lineNo);
    r.n = parse_field<std::size_t>(f[2], "n", lineNo);
    r.b = parse_field<std::size_t>(f[3], "b", lineNo);
    r.d = parse_double(f[4], "d", lineNo);
    r.mode = parse_mode(f[5]);
    r.dtype = parse_data_type(f[6]);
    r.seed = parse_field<std::uint64_t>(f[7], "seed", lineNo);
    if (f[8] != kMissing) {
      r.total_cycles = parse_field<std::uint64_t>(f[8], "total_cycles", lineNo);
      r.achieved_tflops = parse_double(f[9], "achieved_tflops", lineNo);
      if (f[10] != kMissing) {
        r.speedup = parse_double(f[10], "speedup", lineNo);
      }
    }
    records.push_back(r);
  }
  return records;
}

void save_records(const std::filesystem::path &path,
                  std::span<const SweepRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  write_csv(out, records);
  if (!out.flush()) {
    throw Error("failed writing '" + path.string() + "'");
  }
}

std::vector<SweepRecord> load_records(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open '" + path.string() + "'");
  }
  return read_csv(in);
}

} // namespace tilespmm
