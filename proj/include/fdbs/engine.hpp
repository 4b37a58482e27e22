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

// Scatter-gather over catalog services.
//
// A records query first counts per target, then splits each target's rows
// into contiguous ordinal slices (offset/limit over the target's canonical
// order). The number of slices comes from the cost model. Slices are routed
// independently, so one target's slices may be served by different
// replicas. Merging is a fold in target/slice order and does not depend on
// which sub-query finishes first.

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "fdbs/api.hpp"
#include "fdbs/catalog.hpp"
#include "fdbs/clustersim.hpp"
#include "fdbs/costmodel.hpp"

namespace fdbs::engine {

enum class QueryKind { Records, Count, Groups };
enum class MergeOp { ConcatSorted, SumCounts, MergeGroupAggregates };
enum class FailureMode { FailFast, RetryOnce };

// [begin, end) in a target's canonical order.
struct Slice {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const Slice&) const = default;
};

struct PlanTarget {
  catalog::CatalogEntry entry;
  QueryPredicate pred;
  std::size_t estimated_rows = 0;  // this target's matching count
  std::vector<Slice> slices;

  int parallelism() const { return static_cast<int>(slices.size()); }
};

struct QueryPlan {
  QueryKind kind = QueryKind::Records;
  QueryPredicate pred;
  ScanRange window;
  int zoom = 0;
  MergeOp merge = MergeOp::ConcatSorted;
  std::size_t estimated_rows = 0;
  // Targets hold disjoint postcode-prefix ranges and are listed in canonical
  // order, so their slices already cover the requested window and results
  // are concatenated instead of merged.
  bool ordered = false;
  std::vector<PlanTarget> targets;
};

struct QueryResult {
  std::size_t total = 0;  // matching rows (records) or the count
  std::vector<GeoRecord> records;
  std::vector<distill::GroupAggregate> groups;
  std::vector<std::string> source;
};

struct EngineOptions {
  std::string name = "engine";
  std::size_t fanout_cap = 16;
  bool strict = false;  // NoCoverage instead of an empty plan
  FailureMode failure_mode = FailureMode::RetryOnce;
  // Overrides the cost model's choice for every target (benchmarks).
  std::optional<int> forced_parallelism;
};

// Sends one request to a service; normally Cluster::call.
using ServiceCaller = std::function<api::ApiResponse(const std::string&,
                                                     const api::ApiRequest&)>;

class Engine : public api::ReadBackend {
 public:
  Engine(const catalog::Catalog& catalog, ServiceCaller caller,
         cost::CostModel model = cost::CostModel::from_crossover(3000),
         EngineOptions options = {});

  const EngineOptions& options() const { return options_; }
  const cost::CostModel& cost_model() const { return model_; }

  // Per-target counts; the sum is the exact total. Throws PartialFailure.
  std::vector<std::size_t> precount(
      const QueryPredicate& pred,
      const std::vector<catalog::CatalogEntry>& targets,
      std::vector<std::string>* source = nullptr) const;

  // Throws NoCoverage (strict), InvalidPredicate.
  QueryPlan plan(QueryKind kind, const QueryPredicate& pred,
                 ScanRange window = {}, int zoom = 0,
                 std::vector<std::string>* source = nullptr) const;
  // Throws PartialFailure naming the failed slices.
  QueryResult execute(const QueryPlan& plan) const;

  std::pair<std::size_t, std::vector<GeoRecord>> records(
      const QueryPredicate& pred, ScanRange window,
      std::vector<std::string>& source) const override;
  std::size_t count(const QueryPredicate& pred,
                    std::vector<std::string>& source) const override;
  std::vector<distill::GroupAggregate> groups(
      const QueryPredicate& pred, int zoom,
      std::vector<std::string>& source) const override;

 private:
  const catalog::Catalog& catalog_;
  ServiceCaller caller_;
  cost::CostModel model_;
  EngineOptions options_;
  // Global bound on concurrent sub-queries across all queries.
  std::unique_ptr<std::counting_semaphore<>> fanout_;
};

// Prefix-only coverages whose postcode ranges never interleave, returned in
// canonical order. Empty when that does not hold.
std::vector<std::size_t> prefix_order(
    const std::vector<catalog::CatalogEntry>& targets);

// Equal contiguous slices of [begin, end), the remainder in the last one.
// Empty when the range is empty.
std::vector<Slice> split_range(std::size_t begin, std::size_t end, int parts);

// Adds a child federation to a parent: registers `address` as an external
// endpoint backed by `child`, creates a service named `name` fronting it,
// probes /healthz through that service, then registers a federation entry.
// Throws UnreachableChild, NameConflict.
catalog::CatalogEntry federate(catalog::Catalog& parent_catalog,
                               sim::Cluster& parent_cluster,
                               const std::string& name,
                               const std::string& address,
                               api::ApiHandler child,
                               const Coverage& declared_coverage);

// Benchmark runner: a records query of `rows` rows (limit = rows) at the
// given parallelism. Returns the rows actually delivered.
cost::QueryRunner make_runner(const catalog::Catalog& catalog,
                              ServiceCaller caller, QueryPredicate pred);

}  // namespace fdbs::engine
