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

// Latency modelling for intra-query parallelism.
//
// Query latency at a fixed concurrency level k is modelled as a line in the
// number of rows retrieved, elapsed = a_k + b_k * rows. Splitting a query pays
// extra fixed overhead (larger a) and wins on throughput (smaller b), so for
// each pair of levels there is a row count above which the higher level is
// cheaper. The planner asks the model which level is cheapest for an
// estimated row count.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fdbs::cost {

struct LatencySample {
  std::int64_t rows = 1;
  int concurrency = 1;
  double elapsed_ms = 0.0;  // includes the pre-count

  bool operator==(const LatencySample&) const = default;
};

struct LinearModel {
  double intercept_ms = 0.0;
  double slope_ms_per_row = 0.0;
  double r_squared = 1.0;
  std::size_t sample_count = 0;

  double predict(double rows) const {
    return intercept_ms + slope_ms_per_row * rows;
  }
};

struct Point {
  double rows = 0.0;
  double elapsed_ms = 0.0;
};

// Ordinary least squares. Throws DegenerateSamples with fewer than two
// distinct x values.
LinearModel fit_line(std::span<const Point> points);

// Row count where `high` becomes cheaper than `low`. Throws NoCrossover unless
// high has the larger intercept and the smaller slope.
double crossover(const LinearModel& low, const LinearModel& high);

struct TableRow {
  std::int64_t rows_from = 1;  // inclusive
  std::int64_t rows_to = 0;    // inclusive; -1 means unbounded
  int level = 1;
};

class CostModel {
 public:
  // Level 1 only.
  CostModel();

  // Two levels whose lines cross exactly at `threshold` rows; used as the
  // configured default before any benchmark has been fitted.
  static CostModel from_crossover(double threshold);

  // Fits one line per concurrency level present in `samples`.
  static CostModel fit(std::span<const LatencySample> samples);

  void set_level(int level, const LinearModel& model);

  const std::map<int, LinearModel>& models() const { return models_; }
  const std::map<std::pair<int, int>, double>& crossovers() const {
    return crossovers_;
  }

  // Level with the smallest predicted latency; ties go to the lower level.
  int lookup_best(std::int64_t rows) const;

  // Piecewise-constant view of lookup_best over [1, inf).
  std::vector<TableRow> lookup_table() const;

 private:
  void recompute_crossovers();

  std::map<int, LinearModel> models_;
  std::map<std::pair<int, int>, double> crossovers_;
};

struct SimulatedLevel {
  double overhead_ms = 0.0;
  double per_row_ms = 0.0;
};

enum class BenchMode { Simulated, Real };

struct Workload {
  std::vector<std::int64_t> rows_grid;
  std::vector<int> levels{1, 2};
  int repetitions = 1;
  BenchMode mode = BenchMode::Simulated;
  // Simulated latency per level: (overhead + rows * per_row) * (1 + u),
  // u uniform in [-noise, noise].
  std::map<int, SimulatedLevel> simulated;
  double noise = 0.05;
  std::uint64_t seed = 1;
  // Replica count of the target when reads are pinned one slice per
  // replica; levels above it are refused. Zero disables the check.
  int pinned_replicas = 0;
};

// Runs one query returning `rows` records at forced concurrency `level`,
// pre-count included; returns the number of records received.
using QueryRunner = std::function<std::size_t(std::int64_t rows, int level)>;

// One sample per (rows, level, repetition), grid cells run serially.
std::vector<LatencySample> benchmark(const QueryRunner& run,
                                     const Workload& workload);

// Simulated latency for one request, drawing noise from `rng_state`.
double simulated_latency(const SimulatedLevel& level, std::int64_t rows,
                         double noise, std::uint64_t& rng_state);

// "rows,concurrency,elapsed_ms" with header.
std::string samples_to_csv(std::span<const LatencySample> samples);
std::vector<LatencySample> samples_from_csv(std::string_view text);

// "level,intercept_ms,slope_ms_per_row,r_squared,n" with header.
std::string models_to_text(const CostModel& model);
CostModel models_from_text(std::string_view text);

// Whitespace-separated blocks per level, separated by two blank lines
// (gnuplot `index`).
std::string gnuplot_data(std::span<const LatencySample> samples,
                         const CostModel& model);

}  // namespace fdbs::cost
