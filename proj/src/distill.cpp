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

#include "fdbs/distill.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace fdbs::distill {

int prefix_len_for_zoom(int zoom) noexcept {
  switch (zoom) {
    case 1: case 2: case 3: case 4:
      return 1;
    case 5: case 6:
      return 2;
    case 7: case 8:
      return 3;
    case 9: case 10:
      return 4;
    default:
      return 5;  // no grouping
  }
}

std::vector<GroupAggregate> group_aggregates(std::span<const GeoRecord> records,
                                             int zoom) {
  const auto len = static_cast<std::size_t>(prefix_len_for_zoom(zoom));
  std::map<std::string, GroupAggregate> groups;
  for (const auto& r : records) {
    auto prefix = r.postcode.substr(0, len);
    auto& g = groups[prefix];
    g.prefix = std::move(prefix);
    g.count += 1;
    g.sum_lon += to_micro(r.lon);
    g.sum_lat += to_micro(r.lat);
  }
  std::vector<GroupAggregate> out;
  out.reserve(groups.size());
  for (auto& [_, g] : groups) out.push_back(std::move(g));
  return out;
}

std::vector<GroupAggregate> merge_aggregates(
    std::span<const GroupAggregate> aggregates) {
  std::map<std::string, GroupAggregate> merged;
  for (const auto& a : aggregates) {
    auto& g = merged[a.prefix];
    g.prefix = a.prefix;
    g.count += a.count;
    g.sum_lon += a.sum_lon;
    g.sum_lat += a.sum_lat;
  }
  std::vector<GroupAggregate> out;
  out.reserve(merged.size());
  for (auto& [_, g] : merged) out.push_back(std::move(g));
  return out;
}

Centroid centroid_of(const GroupAggregate& a) {
  const auto n = static_cast<double>(a.count);
  return Centroid{a.prefix, static_cast<double>(a.sum_lon) / n / 1e6,
                  static_cast<double>(a.sum_lat) / n / 1e6};
}

std::vector<Centroid> centroids(std::span<const GroupAggregate> aggregates) {
  std::vector<Centroid> out;
  out.reserve(aggregates.size());
  for (const auto& a : aggregates) out.push_back(centroid_of(a));
  std::sort(out.begin(), out.end(),
            [](const Centroid& a, const Centroid& b) { return a.prefix < b.prefix; });
  return out;
}

double distance(const Centroid& c, double lon, double lat,
                DistanceMetric metric) {
  if (metric == DistanceMetric::Planar) {
    const double dx = c.lon - lon;
    const double dy = c.lat - lat;
    return std::sqrt(dx * dx + dy * dy);
  }
  constexpr double kEarthRadiusKm = 6371.0088;
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (c.lat - lat) * kRad;
  const double dlon = (c.lon - lon) * kRad;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat * kRad) * std::cos(c.lat * kRad) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::vector<Neighbour> knn(std::span<const Centroid> centroids, double lon,
                           double lat, int k, DistanceMetric metric) {
  if (k <= 0) return {};
  std::vector<Neighbour> all;
  all.reserve(centroids.size());
  for (const auto& c : centroids) {
    all.push_back({c, distance(c, lon, lat, metric)});
  }
  // Keeping the k smallest distances is the minimum-sum subset of size k.
  auto closer = [](const Neighbour& a, const Neighbour& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.centroid.prefix < b.centroid.prefix;
  };
  auto keep = std::min(all.size(), static_cast<std::size_t>(k));
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep),
                    all.end(), closer);
  all.resize(keep);
  return all;
}

std::vector<Centroid> identify_locations(
    std::span<const GroupAggregate> aggregates, const KnnQuery& query,
    DistanceMetric metric) {
  auto all = centroids(aggregates);
  if (query.k < 0) return all;
  std::vector<Centroid> out;
  for (auto& n : knn(all, query.lon, query.lat, query.k, metric)) {
    out.push_back(std::move(n.centroid));
  }
  return out;
}

}  // namespace fdbs::distill
