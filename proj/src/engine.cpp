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

#include "fdbs/engine.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

#include "fdbs/text.hpp"

namespace fdbs::engine {

namespace {

struct Outcome {
  api::ApiResponse response;
  std::optional<Error> error;
};

std::string chain(const std::vector<std::string>& source) {
  return join(source, ">");
}

// PartialFailure listing every failed sub-query, if any failed.
void throw_failures(const std::vector<Outcome>& outcomes,
                    const std::vector<std::string>& labels) {
  std::vector<std::string> failed;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].error) {
      failed.push_back(labels[i] + " (" +
                       std::string(errc_name(outcomes[i].error->code())) +
                       ": " + outcomes[i].error->what() + ")");
    }
  }
  if (!failed.empty()) {
    throw Error(Errc::PartialFailure, std::to_string(failed.size()) + " of " +
                                          std::to_string(outcomes.size()) +
                                          " sub-queries failed: " +
                                          join(failed, "; "));
  }
}

std::size_t saturating_add(std::size_t a, std::size_t b) {
  return b > std::numeric_limits<std::size_t>::max() - a
             ? std::numeric_limits<std::size_t>::max()
             : a + b;
}

std::string slice_label(const PlanTarget& t, const Slice& s) {
  return t.entry.name + "[" + std::to_string(s.begin) + "," +
         std::to_string(s.end) + ")";
}

}  // namespace

namespace {

bool collect_prefixes(const Coverage& c, std::vector<std::string>& out) {
  if (c.kind() == CoverageKind::Prefix) {
    out.insert(out.end(), c.prefixes().begin(), c.prefixes().end());
    return true;
  }
  if (c.kind() == CoverageKind::Union) {
    for (const auto& part : c.parts()) {
      if (!collect_prefixes(part, out)) return false;
    }
    return true;
  }
  return false;
}

// Every postcode under a sorts before every postcode under b.
bool wholly_before(const std::string& a, const std::string& b) {
  return a < b && !b.starts_with(a);
}

}  // namespace

std::vector<std::size_t> prefix_order(
    const std::vector<catalog::CatalogEntry>& targets) {
  std::vector<std::vector<std::string>> sets(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!collect_prefixes(targets[i].coverage, sets[i]) || sets[i].empty()) {
      return {};
    }
    std::sort(sets[i].begin(), sets[i].end());
  }
  std::vector<std::size_t> order(targets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sets[a].front() < sets[b].front();
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    for (const auto& a : sets[order[i - 1]]) {
      for (const auto& b : sets[order[i]]) {
        if (!wholly_before(a, b)) return {};
      }
    }
  }
  return order;
}

std::vector<Slice> split_range(std::size_t begin, std::size_t end, int parts) {
  std::vector<Slice> out;
  if (end <= begin) return out;
  std::size_t n = end - begin;
  std::size_t k = std::clamp<std::size_t>(parts < 1 ? 1 : parts, 1, n);
  std::size_t step = n / k;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t lo = begin + i * step;
    std::size_t hi = i + 1 == k ? end : lo + step;
    out.push_back({lo, hi});
  }
  return out;
}

Engine::Engine(const catalog::Catalog& catalog, ServiceCaller caller,
               cost::CostModel model, EngineOptions options)
    : catalog_(catalog),
      caller_(std::move(caller)),
      model_(std::move(model)),
      options_(std::move(options)) {
  if (options_.fanout_cap < 1) {
    throw Error(Errc::InvalidSpec, "fan-out cap must be >= 1");
  }
  fanout_ = std::make_unique<std::counting_semaphore<>>(
      static_cast<std::ptrdiff_t>(options_.fanout_cap));
}

namespace {

// Runs every request with at most `cap` in flight; outcomes are indexed like
// the requests.
std::vector<Outcome> scatter(
    const std::vector<std::pair<std::string, api::ApiRequest>>& calls,
    const ServiceCaller& caller, std::counting_semaphore<>& fanout,
    std::size_t cap, FailureMode mode) {
  std::vector<Outcome> out(calls.size());
  auto attempt = [&](std::size_t i) {
    int attempts = mode == FailureMode::RetryOnce ? 2 : 1;
    for (int a = 0; a < attempts; ++a) {
      api::ApiResponse resp;
      fanout.acquire();
      try {
        resp = caller(calls[i].first, calls[i].second);
      } catch (const Error& e) {
        fanout.release();
        out[i].error = e;
        continue;
      } catch (const std::exception& e) {
        fanout.release();
        out[i].error = Error(Errc::ServiceUnavailable, e.what());
        continue;
      }
      fanout.release();
      if (!resp.ok()) {
        try {
          api::raise_from(resp, calls[i].first);
        } catch (const Error& e) {
          out[i].error = e;
        }
        continue;
      }
      out[i].response = std::move(resp);
      out[i].error.reset();
      return;
    }
  };

  std::size_t workers = std::min(cap, calls.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < calls.size(); ++i) attempt(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (auto i = next.fetch_add(1); i < calls.size(); i = next.fetch_add(1)) {
        attempt(i);
      }
    });
  }
  for (auto& t : threads) t.join();
  return out;
}

}  // namespace

std::vector<std::size_t> Engine::precount(
    const QueryPredicate& pred,
    const std::vector<catalog::CatalogEntry>& targets,
    std::vector<std::string>* source) const {
  std::vector<std::pair<std::string, api::ApiRequest>> calls;
  for (const auto& t : targets) {
    calls.emplace_back(t.service_id,
                       api::ApiRequest::get("/count", api::predicate_params(pred)));
  }
  auto outcomes = scatter(calls, caller_, *fanout_, options_.fanout_cap,
                          options_.failure_mode);
  std::vector<std::string> labels;
  for (const auto& t : targets) labels.push_back(t.name + " count");
  throw_failures(outcomes, labels);
  std::vector<std::size_t> counts;
  for (auto& o : outcomes) {
    counts.push_back(o.response.body.at("count").get<std::size_t>());
    if (source) source->push_back(chain(o.response.source));
  }
  return counts;
}

QueryPlan Engine::plan(QueryKind kind, const QueryPredicate& pred,
                       ScanRange window, int zoom,
                       std::vector<std::string>* source) const {
  pred.validate();
  QueryPlan plan;
  plan.kind = kind;
  plan.pred = pred;
  plan.window = window;
  plan.zoom = zoom;
  plan.merge = kind == QueryKind::Records  ? MergeOp::ConcatSorted
               : kind == QueryKind::Count ? MergeOp::SumCounts
                                          : MergeOp::MergeGroupAggregates;
  auto targets = catalog_.resolve(pred);
  if (targets.empty() && options_.strict) {
    throw Error(Errc::NoCoverage, "no catalog entry covers the predicate");
  }
  if (kind != QueryKind::Records) {
    // Counts and aggregates run as one whole-target sub-query each.
    for (auto& t : targets) plan.targets.push_back({std::move(t), pred, 0, {}});
    return plan;
  }
  if (targets.size() <= 1) {
    plan.ordered = true;
  } else if (auto order = prefix_order(targets); !order.empty()) {
    std::vector<catalog::CatalogEntry> sorted;
    for (auto i : order) sorted.push_back(std::move(targets[i]));
    targets = std::move(sorted);
    plan.ordered = true;
  }
  auto counts = precount(pred, targets, source);
  const std::size_t want_end = saturating_add(window.offset, window.limit);
  std::size_t start = 0;  // rows before this target, when ordered
  for (std::size_t i = 0; i < targets.size(); ++i) {
    PlanTarget t{std::move(targets[i]), pred, counts[i], {}};
    plan.estimated_rows += counts[i];
    // Ordered targets: push the window down. Otherwise each must supply its
    // first offset+limit rows for the merged window to be exact.
    auto local = [&](std::size_t g) {
      return std::min(g > start ? g - start : 0, counts[i]);
    };
    std::size_t lo = plan.ordered ? local(window.offset) : 0;
    std::size_t hi = plan.ordered ? local(want_end) : std::min(want_end, counts[i]);
    start += counts[i];
    if (hi > lo) {
      int k = options_.forced_parallelism
                  ? *options_.forced_parallelism
                  : model_.lookup_best(static_cast<std::int64_t>(hi - lo));
      t.slices = split_range(lo, hi, k);
    }
    plan.targets.push_back(std::move(t));
  }
  return plan;
}

QueryResult Engine::execute(const QueryPlan& plan) const {
  std::vector<std::pair<std::string, api::ApiRequest>> calls;
  std::vector<std::string> labels;
  std::vector<std::size_t> owner;
  for (std::size_t ti = 0; ti < plan.targets.size(); ++ti) {
    const auto& t = plan.targets[ti];
    auto params = api::predicate_params(t.pred);
    if (plan.kind == QueryKind::Records) {
      for (const auto& s : t.slices) {
        auto p = params;
        p["offset"] = std::to_string(s.begin);
        p["limit"] = std::to_string(s.end - s.begin);
        calls.emplace_back(t.entry.service_id, api::ApiRequest::get("/records", p));
        labels.push_back(slice_label(t, s));
        owner.push_back(ti);
      }
    } else if (plan.kind == QueryKind::Count) {
      calls.emplace_back(t.entry.service_id, api::ApiRequest::get("/count", params));
      labels.push_back(t.entry.name);
      owner.push_back(ti);
    } else {
      params["zoom"] = std::to_string(plan.zoom);
      calls.emplace_back(t.entry.service_id, api::ApiRequest::get("/groups", params));
      labels.push_back(t.entry.name);
      owner.push_back(ti);
    }
  }
  auto outcomes = scatter(calls, caller_, *fanout_, options_.fanout_cap,
                          options_.failure_mode);

  throw_failures(outcomes, labels);

  QueryResult result;
  for (const auto& o : outcomes) result.source.push_back(chain(o.response.source));

  if (plan.kind == QueryKind::Count) {
    for (const auto& o : outcomes) {
      result.total += o.response.body.at("count").get<std::size_t>();
    }
    return result;
  }
  if (plan.kind == QueryKind::Groups) {
    std::vector<distill::GroupAggregate> all;
    for (const auto& o : outcomes) {
      for (const auto& g : o.response.body.at("groups")) {
        all.push_back(api::aggregate_from_json(g));
      }
    }
    result.groups = distill::merge_aggregates(all);
    result.total = result.groups.size();
    return result;
  }

  // Records: per-target concatenation of slices, already in canonical order.
  std::vector<std::vector<GeoRecord>> per_target(plan.targets.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& recs = outcomes[i].response.body.at("records");
    auto& dest = per_target[owner[i]];
    std::size_t before = dest.size();
    for (const auto& r : recs) dest.push_back(api::record_from_json(r));
    std::size_t want = std::stoull(calls[i].second.params.at("limit"));
    if (dest.size() - before != want) {
      throw Error(Errc::PartialFailure,
                  "slice " + labels[i] + " returned " +
                      std::to_string(dest.size() - before) + " rows");
    }
  }
  result.total = plan.estimated_rows;
  if (plan.ordered) {
    for (auto& part : per_target) {
      result.records.insert(result.records.end(),
                            std::make_move_iterator(part.begin()),
                            std::make_move_iterator(part.end()));
    }
    return result;
  }
  std::vector<GeoRecord> merged;
  for (auto& part : per_target) {
    std::vector<GeoRecord> next;
    next.reserve(merged.size() + part.size());
    std::merge(std::make_move_iterator(merged.begin()),
               std::make_move_iterator(merged.end()),
               std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()), std::back_inserter(next),
               canonical_less);
    merged = std::move(next);
  }
  std::size_t lo = std::min(plan.window.offset, merged.size());
  std::size_t hi = std::min(saturating_add(lo, plan.window.limit), merged.size());
  result.records.assign(std::make_move_iterator(merged.begin() + lo),
                        std::make_move_iterator(merged.begin() + hi));
  return result;
}

std::pair<std::size_t, std::vector<GeoRecord>> Engine::records(
    const QueryPredicate& pred, ScanRange window,
    std::vector<std::string>& source) const {
  source.push_back("engine:" + options_.name);
  auto p = plan(QueryKind::Records, pred, window, 0, &source);
  auto r = execute(p);
  source.insert(source.end(), r.source.begin(), r.source.end());
  return {r.total, std::move(r.records)};
}

std::size_t Engine::count(const QueryPredicate& pred,
                          std::vector<std::string>& source) const {
  source.push_back("engine:" + options_.name);
  auto r = execute(plan(QueryKind::Count, pred));
  source.insert(source.end(), r.source.begin(), r.source.end());
  return r.total;
}

std::vector<distill::GroupAggregate> Engine::groups(
    const QueryPredicate& pred, int zoom,
    std::vector<std::string>& source) const {
  source.push_back("engine:" + options_.name);
  auto r = execute(plan(QueryKind::Groups, pred, {}, zoom));
  source.insert(source.end(), r.source.begin(), r.source.end());
  return std::move(r.groups);
}

catalog::CatalogEntry federate(catalog::Catalog& parent_catalog,
                               sim::Cluster& parent_cluster,
                               const std::string& name,
                               const std::string& address,
                               api::ApiHandler child,
                               const Coverage& declared_coverage) {
  catalog::CatalogEntry entry;
  entry.name = name;
  entry.service_id = name;
  entry.kind = catalog::Kind::Federation;
  entry.coverage = declared_coverage;
  for (const auto& e : parent_catalog.snapshot()) {
    if (e.name == name && !e.same_as(entry)) {
      throw Error(Errc::NameConflict,
                  "catalog already has a different entry named " + name);
    }
  }
  if (child) parent_cluster.register_endpoint(address, std::move(child));
  bool have_service = false;
  for (const auto& id : parent_cluster.service_ids()) have_service |= id == name;
  if (!have_service) {
    parent_cluster.create_service({name, {}, sim::Policy::RoundRobin, address});
  }
  try {
    auto resp = parent_cluster.call(name, api::ApiRequest::get("/healthz"));
    if (!resp.ok()) {
      throw Error(Errc::UnreachableChild,
                  "child " + name + " at " + address + " answered " +
                      std::to_string(resp.status) + " to /healthz");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::UnreachableChild) throw;
    throw Error(Errc::UnreachableChild, "child " + name + " at " + address +
                                            " is unreachable: " + e.what());
  } catch (const std::exception& e) {
    throw Error(Errc::UnreachableChild, "child " + name + " at " + address +
                                            " is unreachable: " + e.what());
  }
  return parent_catalog.register_entry(entry);
}

cost::QueryRunner make_runner(const catalog::Catalog& catalog,
                              ServiceCaller caller, QueryPredicate pred) {
  return [&catalog, caller = std::move(caller), pred = std::move(pred)](
             std::int64_t rows, int level) -> std::size_t {
    EngineOptions opts;
    opts.name = "bench";
    opts.forced_parallelism = level;
    Engine engine(catalog, caller, cost::CostModel{}, opts);
    auto plan = engine.plan(QueryKind::Records, pred,
                            ScanRange{0, static_cast<std::size_t>(rows)});
    return engine.execute(plan).records.size();
  };
}

}  // namespace fdbs::engine
