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

// Zoom-dependent postcode grouping, group centroids, and nearest-centroid
// selection.
//
// Groups are carried as (count, sum_lon, sum_lat) aggregates with the sums
// held in exact micro-degrees, so aggregates computed on different shards
// merge by plain addition and the resulting centroids do not depend on how
// the records were sharded.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fdbs/geostore.hpp"

namespace fdbs::distill {

// zoom 1-4 -> 1, 5-6 -> 2, 7-8 -> 3, 9-10 -> 4, anything else -> 5.
int prefix_len_for_zoom(int zoom) noexcept;

struct GroupAggregate {
  std::string prefix;
  std::int64_t count = 0;
  MicroDegrees sum_lon = 0;
  MicroDegrees sum_lat = 0;

  bool operator==(const GroupAggregate&) const = default;
};

struct Centroid {
  std::string prefix;
  double lon = 0.0;
  double lat = 0.0;

  bool operator==(const Centroid&) const = default;
};

struct Neighbour {
  Centroid centroid;
  double distance = 0.0;
};

enum class DistanceMetric {
  Planar,     // |centroid - address| over (lon, lat) in degrees
  Haversine,  // great-circle kilometres
};

struct KnnQuery {
  int zoom = 0;
  double lon = 0.0;
  double lat = 0.0;
  int k = -1;  // negative: grouping mode
};

// One aggregate per distinct prefix, sorted by prefix.
std::vector<GroupAggregate> group_aggregates(std::span<const GeoRecord> records,
                                             int zoom);

// Sums aggregates sharing a prefix; output sorted by prefix.
std::vector<GroupAggregate> merge_aggregates(
    std::span<const GroupAggregate> aggregates);

Centroid centroid_of(const GroupAggregate& aggregate);
std::vector<Centroid> centroids(std::span<const GroupAggregate> aggregates);

double distance(const Centroid& c, double lon, double lat,
                DistanceMetric metric = DistanceMetric::Planar);

// The min(k, n) nearest centroids by ascending distance, ties by prefix.
// k <= 0 yields an empty result.
std::vector<Neighbour> knn(std::span<const Centroid> centroids, double lon,
                           double lat, int k,
                           DistanceMetric metric = DistanceMetric::Planar);

// Grouping when query.k < 0 (address ignored), otherwise the k nearest.
std::vector<Centroid> identify_locations(
    std::span<const GroupAggregate> aggregates, const KnnQuery& query,
    DistanceMetric metric = DistanceMetric::Planar);

}  // namespace fdbs::distill
