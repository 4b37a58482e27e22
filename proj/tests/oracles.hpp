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

// Test-only reference implementations. These deliberately avoid the library
// code paths they check: plain loops, full sorts, exhaustive enumeration.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "fdbs/geostore.hpp"

namespace fdbs::oracle {

inline bool key_less(const GeoRecord& a, const GeoRecord& b) {
  if (a.postcode != b.postcode) return a.postcode < b.postcode;
  if (a.theme != b.theme) return a.theme < b.theme;
  if (a.lon != b.lon) return a.lon < b.lon;
  return a.lat < b.lat;
}

inline bool in_box(const BBox& b, double lon, double lat) {
  bool lon_ok = lon >= b.lon_min && lon < b.lon_max;
  bool lat_ok = lat >= b.lat_min &&
                (lat < b.lat_max || (b.lat_max == 90.0 && lat == 90.0));
  return lon_ok && lat_ok;
}

inline bool pred_match(const QueryPredicate& p, const GeoRecord& r) {
  if (p.prefix && r.postcode.compare(0, p.prefix->size(), *p.prefix) != 0) {
    return false;
  }
  if (p.theme && r.theme != *p.theme) return false;
  if (p.bbox && !in_box(*p.bbox, r.lon, r.lat)) return false;
  return true;
}

// Filter, full sort, slice.
inline std::vector<GeoRecord> filter_sort_slice(
    std::vector<GeoRecord> all, const QueryPredicate& p, std::size_t offset,
    std::size_t limit) {
  std::vector<GeoRecord> hits;
  for (auto& r : all) {
    if (pred_match(p, r)) hits.push_back(r);
  }
  std::sort(hits.begin(), hits.end(), key_less);
  std::vector<GeoRecord> out;
  for (std::size_t i = offset; i < hits.size() && out.size() < limit; ++i) {
    out.push_back(hits[i]);
  }
  return out;
}

inline std::size_t brute_count(const std::vector<GeoRecord>& all,
                               const QueryPredicate& p) {
  std::size_t n = 0;
  for (const auto& r : all) n += pred_match(p, r) ? 1 : 0;
  return n;
}

struct GroupMean {
  std::string prefix;
  std::size_t count = 0;
  double lon = 0.0;
  double lat = 0.0;
};

// Group-by on the leading digits, arithmetic mean per group, sorted by prefix.
inline std::vector<GroupMean> group_means(const std::vector<GeoRecord>& all,
                                          std::size_t prefix_len) {
  std::map<std::string, std::vector<const GeoRecord*>> groups;
  for (const auto& r : all) groups[r.postcode.substr(0, prefix_len)].push_back(&r);
  std::vector<GroupMean> out;
  for (const auto& [prefix, members] : groups) {
    long double lon = 0.0L;
    long double lat = 0.0L;
    for (const auto* r : members) {
      lon += r->lon;
      lat += r->lat;
    }
    out.push_back({prefix, members.size(),
                   static_cast<double>(lon / members.size()),
                   static_cast<double>(lat / members.size())});
  }
  return out;
}

// Random predicate over the synthetic generator's value ranges. Never
// returns an unconstrained predicate unless match_all is set.
inline QueryPredicate random_predicate(std::mt19937_64& rng) {
  QueryPredicate p;
  auto coin = [&] { return rng() % 2 == 0; };
  if (coin()) {
    auto len = 1 + rng() % 3;
    std::string prefix;
    for (std::size_t i = 0; i < len; ++i) prefix += char('0' + rng() % 10);
    p.prefix = prefix;
  }
  if (coin()) {
    double lon_lo = -125.0 + double(rng() % 55);
    double lat_lo = 25.0 + double(rng() % 20);
    p.bbox = BBox{lon_lo, lon_lo + 1.0 + double(rng() % 20), lat_lo,
                  std::min(90.0, lat_lo + 1.0 + double(rng() % 15))};
  }
  if (rng() % 4 == 0) p.theme = coin() ? "postcode" : "climate";
  if (p.empty_filter()) p.match_all = true;
  return p;
}

}  // namespace fdbs::oracle
