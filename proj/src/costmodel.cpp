// Copyright 2026 The fdbs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fdbs/costmodel.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <set>

#include "fdbs/error.hpp"
#include "fdbs/text.hpp"

namespace fdbs::cost {

namespace {

std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename T>
T parse_field(std::string_view text, std::string_view what) {
  T value{};
  auto t = trim(text);
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || end != t.data() + t.size()) {
    throw Error(Errc::FormatError,
                "bad " + std::string(what) + " value '" + std::string(t) + "'");
  }
  return value;
}

// splitmix64; fixed so simulated runs reproduce across standard libraries.
std::uint64_t next_random(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

LinearModel fit_line(std::span<const Point> points) {
  std::set<double> distinct;
  for (const auto& p : points) distinct.insert(p.rows);
  if (distinct.size() < 2) {
    throw Error(Errc::DegenerateSamples,
                "linear fit needs at least two distinct row counts");
  }
  const auto n = static_cast<double>(points.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& p : points) {
    mean_x += p.rows;
    mean_y += p.elapsed_ms;
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (const auto& p : points) {
    const double dx = p.rows - mean_x;
    const double dy = p.elapsed_ms - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  LinearModel m;
  m.slope_ms_per_row = sxy / sxx;
  m.intercept_ms = mean_y - m.slope_ms_per_row * mean_x;
  m.sample_count = points.size();
  double ss_res = 0.0;
  for (const auto& p : points) {
    const double r = p.elapsed_ms - m.predict(p.rows);
    ss_res += r * r;
  }
  if (syy == 0.0) {
    m.r_squared = ss_res == 0.0 ? 1.0 : 0.0;
  } else {
    m.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return m;
}

double crossover(const LinearModel& low, const LinearModel& high) {
  if (!(high.intercept_ms > low.intercept_ms) ||
      !(high.slope_ms_per_row < low.slope_ms_per_row)) {
    throw Error(Errc::NoCrossover,
                "no crossover: the higher level needs a larger intercept and "
                "a smaller slope");
  }
  return (high.intercept_ms - low.intercept_ms) /
         (low.slope_ms_per_row - high.slope_ms_per_row);
}

CostModel::CostModel() {
  models_[1] = LinearModel{0.0, 1.0, 1.0, 2};
}

CostModel CostModel::from_crossover(double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw Error(Errc::InvalidSpec, "crossover threshold must be positive");
  }
  CostModel m;
  m.models_.clear();
  // cost_1(n) = n and cost_2(n) = t/2 + n/2 meet exactly at n = t.
  m.models_[1] = LinearModel{0.0, 1.0, 1.0, 2};
  m.models_[2] = LinearModel{threshold * 0.5, 0.5, 1.0, 2};
  m.recompute_crossovers();
  return m;
}

CostModel CostModel::fit(std::span<const LatencySample> samples) {
  std::map<int, std::vector<Point>> by_level;
  for (const auto& s : samples) {
    by_level[s.concurrency].push_back(
        {static_cast<double>(s.rows), s.elapsed_ms});
  }
  if (!by_level.contains(1)) {
    throw Error(Errc::DegenerateSamples, "cost model needs level-1 samples");
  }
  CostModel m;
  m.models_.clear();
  for (const auto& [level, points] : by_level) {
    m.models_[level] = fit_line(points);
  }
  m.recompute_crossovers();
  return m;
}

void CostModel::set_level(int level, const LinearModel& model) {
  if (level < 1) throw Error(Errc::InvalidSpec, "level must be >= 1");
  models_[level] = model;
  recompute_crossovers();
}

void CostModel::recompute_crossovers() {
  crossovers_.clear();
  for (auto lo = models_.begin(); lo != models_.end(); ++lo) {
    for (auto hi = std::next(lo); hi != models_.end(); ++hi) {
      try {
        crossovers_[{lo->first, hi->first}] = crossover(lo->second, hi->second);
      } catch (const Error&) {
        // Pair never crosses in the profitable direction.
      }
    }
  }
}

int CostModel::lookup_best(std::int64_t rows) const {
  int best = 1;
  double best_cost = 0.0;
  bool first = true;
  for (const auto& [level, model] : models_) {
    const double c = model.predict(static_cast<double>(rows));
    if (first || c < best_cost) {
      best = level;
      best_cost = c;
      first = false;
    }
  }
  return best;
}

std::vector<TableRow> CostModel::lookup_table() const {
  // lookup_best can only change where two lines intersect.
  std::set<std::int64_t> starts{1};
  for (auto a = models_.begin(); a != models_.end(); ++a) {
    for (auto b = std::next(a); b != models_.end(); ++b) {
      const double ds = a->second.slope_ms_per_row - b->second.slope_ms_per_row;
      if (ds == 0.0) continue;
      const double x =
          (b->second.intercept_ms - a->second.intercept_ms) / ds;
      if (x >= 1.0 && x < 9e15) {
        starts.insert(static_cast<std::int64_t>(std::floor(x)));
        starts.insert(static_cast<std::int64_t>(std::floor(x)) + 1);
      }
    }
  }
  std::vector<TableRow> table;
  for (auto start : starts) {
    const int level = lookup_best(start);
    if (!table.empty() && table.back().level == level) continue;
    if (!table.empty()) table.back().rows_to = start - 1;
    table.push_back({start, -1, level});
  }
  return table;
}

double simulated_latency(const SimulatedLevel& level, std::int64_t rows,
                         double noise, std::uint64_t& rng_state) {
  const double unit =
      static_cast<double>(next_random(rng_state) >> 11) * 0x1.0p-53;
  const double u = noise * (2.0 * unit - 1.0);
  return (level.overhead_ms + static_cast<double>(rows) * level.per_row_ms) *
         (1.0 + u);
}

std::vector<LatencySample> benchmark(const QueryRunner& run,
                                     const Workload& workload) {
  for (int level : workload.levels) {
    if (level < 1) throw Error(Errc::InvalidSpec, "levels must be >= 1");
    if (workload.pinned_replicas > 0 && level > workload.pinned_replicas) {
      throw Error(Errc::InvalidSpec,
                  "level " + std::to_string(level) + " exceeds the " +
                      std::to_string(workload.pinned_replicas) +
                      " deployed replicas");
    }
    if (workload.mode == BenchMode::Simulated &&
        !workload.simulated.contains(level)) {
      throw Error(Errc::InvalidSpec, "no simulated latency for level " +
                                         std::to_string(level));
    }
  }
  std::uint64_t rng_state = workload.seed;
  std::vector<LatencySample> samples;
  for (auto rows : workload.rows_grid) {
    if (rows < 1) throw Error(Errc::InvalidSpec, "grid rows must be >= 1");
    for (int level : workload.levels) {
      for (int rep = 0; rep < workload.repetitions; ++rep) {
        LatencySample s{rows, level, 0.0};
        if (workload.mode == BenchMode::Simulated) {
          auto got = run(rows, level);
          if (got != static_cast<std::size_t>(rows)) {
            throw Error(Errc::InvalidSpec,
                        "benchmark query returned " + std::to_string(got) +
                            " rows, expected " + std::to_string(rows));
          }
          s.elapsed_ms = simulated_latency(workload.simulated.at(level), rows,
                                           workload.noise, rng_state);
        } else {
          auto t0 = std::chrono::steady_clock::now();
          run(rows, level);
          auto t1 = std::chrono::steady_clock::now();
          s.elapsed_ms = std::max(
              1e-6,
              std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        samples.push_back(s);
      }
    }
  }
  return samples;
}

std::string samples_to_csv(std::span<const LatencySample> samples) {
  std::string out = "rows,concurrency,elapsed_ms\n";
  for (const auto& s : samples) {
    out += std::to_string(s.rows) + "," + std::to_string(s.concurrency) + "," +
           num(s.elapsed_ms) + "\n";
  }
  return out;
}

std::vector<LatencySample> samples_from_csv(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]) != "rows,concurrency,elapsed_ms") {
    throw Error(Errc::FormatError,
                "samples need header 'rows,concurrency,elapsed_ms'");
  }
  std::vector<LatencySample> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto f = split(lines[i], ',');
    if (f.size() != 3) {
      throw Error(Errc::FormatError,
                  "sample line " + std::to_string(i + 1) + " needs 3 fields");
    }
    LatencySample s{parse_field<std::int64_t>(f[0], "rows"),
                    parse_field<int>(f[1], "concurrency"),
                    parse_field<double>(f[2], "elapsed_ms")};
    if (s.rows < 1 || s.concurrency < 1 || !(s.elapsed_ms > 0.0)) {
      throw Error(Errc::FormatError, "sample line " + std::to_string(i + 1) +
                                         " violates rows>=1, concurrency>=1, "
                                         "elapsed_ms>0");
    }
    out.push_back(s);
  }
  return out;
}

std::string models_to_text(const CostModel& model) {
  std::string out = "level,intercept_ms,slope_ms_per_row,r_squared,n\n";
  for (const auto& [level, m] : model.models()) {
    out += std::to_string(level) + "," + num(m.intercept_ms) + "," +
           num(m.slope_ms_per_row) + "," + num(m.r_squared) + "," +
           std::to_string(m.sample_count) + "\n";
  }
  return out;
}

CostModel models_from_text(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.empty() ||
      trim(lines[0]) != "level,intercept_ms,slope_ms_per_row,r_squared,n") {
    throw Error(Errc::FormatError, "models need header "
                                   "'level,intercept_ms,slope_ms_per_row,"
                                   "r_squared,n'");
  }
  CostModel model;
  bool has_level1 = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto f = split(lines[i], ',');
    if (f.size() != 5) {
      throw Error(Errc::FormatError,
                  "model line " + std::to_string(i + 1) + " needs 5 fields");
    }
    int level = parse_field<int>(f[0], "level");
    LinearModel m{parse_field<double>(f[1], "intercept_ms"),
                  parse_field<double>(f[2], "slope_ms_per_row"),
                  parse_field<double>(f[3], "r_squared"),
                  parse_field<std::size_t>(f[4], "n")};
    has_level1 = has_level1 || level == 1;
    model.set_level(level, m);
  }
  if (!has_level1) throw Error(Errc::FormatError, "models need level 1");
  return model;
}

std::string gnuplot_data(std::span<const LatencySample> samples,
                         const CostModel& model) {
  std::map<int, std::vector<LatencySample>> by_level;
  for (const auto& s : samples) by_level[s.concurrency].push_back(s);
  std::string out;
  bool first = true;
  for (const auto& [level, rows] : by_level) {
    if (!first) out += "\n\n";
    first = false;
    out += "# level " + std::to_string(level);
    if (auto it = model.models().find(level); it != model.models().end()) {
      out += " fit " + num(it->second.intercept_ms) + " + " +
             num(it->second.slope_ms_per_row) + "*x";
    }
    out += "\n# rows elapsed_ms\n";
    for (const auto& s : rows) {
      out += std::to_string(s.rows) + " " + num(s.elapsed_ms) + "\n";
    }
  }
  return out;
}

}  // namespace fdbs::cost
