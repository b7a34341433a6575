// SPDX-License-Identifier: Apache-2.0
#include "tilespmm/analysis.hpp"

#include "tilespmm/error.hpp"
#include "tilespmm/records.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <tuple>

namespace tilespmm {

namespace {

double parse_positive(const std::string &text, std::string_view whole) {
  char *end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw Error("bad density '" + std::string(whole) + "'");
  }
  return v;
}

} // namespace

double parse_density(std::string_view text) {
  const auto slash = text.find('/');
  double d = 0;
  if (slash == std::string_view::npos) {
    d = parse_positive(std::string(text), text);
  } else {
    const double num = parse_positive(std::string(text.substr(0, slash)), text);
    const double den = parse_positive(std::string(text.substr(slash + 1)), text);
    if (den == 0) {
      throw Error("bad density '" + std::string(text) + "': zero denominator");
    }
    d = num / den;
  }
  if (!(d > 0 && d <= 1)) {
    throw Error("density '" + std::string(text) + "' is outside (0, 1]");
  }
  return d;
}

std::vector<SweepRecord> best_over_batch(std::span<const SweepRecord> records) {
  if (records.empty()) {
    throw Error("best_over_batch: no records");
  }
  using Key = std::tuple<std::size_t, double, std::size_t, Mode, DataType>;
  std::map<Key, std::size_t> slot;
  std::vector<SweepRecord> best;
  for (const auto &r : records) {
    if (r.skipped()) {
      continue;
    }
    const Key key{r.m, r.d, r.b, r.mode, r.dtype};
    const auto [it, inserted] = slot.try_emplace(key, best.size());
    if (inserted) {
      best.push_back(r);
      continue;
    }
    auto &cur = best[it->second];
    if (*r.achieved_tflops > *cur.achieved_tflops ||
        (*r.achieved_tflops == *cur.achieved_tflops && r.n < cur.n)) {
      cur = r;
    }
  }
  return best;
}

double PowerLawFit::predict(double m, double d, double b) const {
  return c * std::pow(m, alpha) * std::pow(d, beta) * std::pow(b, gamma);
}

PowerLawFit fit_power_law(std::span<const PowerLawSample> samples) {
  std::set<std::tuple<double, double, double>> distinct;
  for (const auto &s : samples) {
    if (!(s.ratio > 0) || !(s.m > 0) || !(s.d > 0) || !(s.b > 0)) {
      throw Error("fit_power_law: m, d, b and ratio must all be positive");
    }
    distinct.emplace(s.m, s.d, s.b);
  }
  if (distinct.size() < 4) {
    throw Error("fit_power_law: need at least 4 distinct (m, d, b) points, got " +
                std::to_string(distinct.size()));
  }

  const auto rows = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd a(rows, 4);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto &s = samples[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = std::log(s.m);
    a(i, 2) = std::log(s.d);
    a(i, 3) = std::log(s.b);
    y(i) = std::log(s.ratio);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 4) {
    static const char *names[] = {"", "m", "d", "b"};
    std::string flat;
    for (int j = 1; j < 4; ++j) {
      if ((a.col(j).array() - a(0, j)).abs().maxCoeff() == 0) {
        flat += flat.empty() ? "" : ", ";
        flat += names[j];
      }
    }
    throw Error("fit_power_law: design matrix is rank deficient (rank " +
                std::to_string(qr.rank()) + " of 4)" +
                (flat.empty() ? "" : "; no variation in " + flat));
  }
  const Eigen::VectorXd x = qr.solve(y);
  const Eigen::VectorXd r = a * x - y;

  PowerLawFit fit;
  fit.c = std::exp(x(0));
  fit.alpha = x(1);
  fit.beta = x(2);
  fit.gamma = x(3);
  fit.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(rows));
  fit.samples = samples.size();
  return fit;
}

PowerLawFit fit_power_law(std::span<const SweepRecord> records, Mode mode,
                          DataType dtype) {
  std::vector<PowerLawSample> samples;
  for (const auto &r : best_over_batch(records)) {
    if (r.mode != mode || r.dtype != dtype || !r.speedup) {
      continue;
    }
    samples.push_back({static_cast<double>(r.m), r.d, static_cast<double>(r.b),
                       *r.speedup});
  }
  return fit_power_law(samples);
}

SpeedupGrid speedup_grid(std::span<const SweepRecord> records, DataType dtype,
                         Mode mode) {
  auto rowLess = [](const SpeedupGrid::RowKey &x, const SpeedupGrid::RowKey &y) {
    return x.b != y.b ? x.b < y.b : x.d > y.d;
  };
  auto colLess = [](const SpeedupGrid::ColKey &x, const SpeedupGrid::ColKey &y) {
    return x.m != y.m ? x.m < y.m : x.n < y.n;
  };
  std::set<SpeedupGrid::RowKey, decltype(rowLess)> rowSet(rowLess);
  std::set<SpeedupGrid::ColKey, decltype(colLess)> colSet(colLess);
  for (const auto &r : records) {
    if (r.mode == mode && r.dtype == dtype) {
      rowSet.insert({r.b, r.d});
      colSet.insert({r.m, r.n});
    }
  }
  SpeedupGrid grid;
  grid.rows.assign(rowSet.begin(), rowSet.end());
  grid.cols.assign(colSet.begin(), colSet.end());
  grid.cells.assign(grid.rows.size() * grid.cols.size(), std::nullopt);
  for (const auto &r : records) {
    if (r.mode != mode || r.dtype != dtype || !r.speedup) {
      continue;
    }
    const auto ri = std::distance(
        grid.rows.begin(),
        std::lower_bound(grid.rows.begin(), grid.rows.end(),
                         SpeedupGrid::RowKey{r.b, r.d}, rowLess));
    const auto ci = std::distance(
        grid.cols.begin(),
        std::lower_bound(grid.cols.begin(), grid.cols.end(),
                         SpeedupGrid::ColKey{r.m, r.n}, colLess));
    grid.cells[static_cast<std::size_t>(ri) * grid.cols.size() +
               static_cast<std::size_t>(ci)] = *r.speedup;
  }
  return grid;
}

void write_grid_csv(std::ostream &out, const SpeedupGrid &grid) {
  out << "b,d";
  for (const auto &c : grid.cols) {
    out << ",m" << c.m << "_n" << c.n;
  }
  out << '\n';
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    out << grid.rows[i].b << ',' << format_number(grid.rows[i].d);
    for (std::size_t j = 0; j < grid.cols.size(); ++j) {
      const auto &cell = grid.at(i, j);
      out << ',' << (cell ? format_number(*cell) : std::string("NA"));
    }
    out << '\n';
  }
}

std::optional<double> crossover_density(std::span<const DensityRatio> points) {
  std::vector<DensityRatio> sorted(points.begin(), points.end());
  for (const auto &p : sorted) {
    if (!(p.d > 0) || !(p.ratio > 0)) {
      throw Error("crossover_density: densities and ratios must be positive");
    }
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto &x, const auto &y) { return x.d > y.d; });
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double r0 = std::log(sorted[i].ratio);
    const double r1 = std::log(sorted[i + 1].ratio);
    if (r0 == 0) {
      return sorted[i].d;
    }
    if ((r0 < 0) != (r1 < 0) || r1 == 0) {
      const double l0 = std::log(sorted[i].d);
      const double l1 = std::log(sorted[i + 1].d);
      return std::exp(l0 + (0 - r0) * (l1 - l0) / (r1 - r0));
    }
  }
  return std::nullopt;
}

std::optional<double> crossover_density(std::span<const SweepRecord> records,
                                        std::size_t m, std::size_t b,
                                        DataType dtype) {
  std::vector<SweepRecord> matching;
  for (const auto &r : records) {
    if (r.mode == Mode::static_sparse && r.m == m && r.b == b &&
        r.dtype == dtype && !r.skipped() && r.speedup) {
      matching.push_back(r);
    }
  }
  if (matching.empty()) {
    return std::nullopt;
  }
  std::vector<DensityRatio> points;
  for (const auto &r : best_over_batch(matching)) {
    points.push_back({r.d, *r.speedup});
  }
  return crossover_density(points);
}

} // namespace tilespmm
