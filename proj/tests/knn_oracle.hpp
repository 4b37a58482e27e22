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

// Nearest-centroid oracles: a full sort on exact squared distances, and an
// exhaustive search over all size-k subsets for the minimum distance sum.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fdbs/distill.hpp"

namespace fdbs::oracle {

// Unique prefixes. With `ties`, coordinates are small integers so that equal
// distances are common and exact.
inline std::vector<distill::Centroid> random_centroids(std::mt19937_64& rng,
                                                       std::size_t n,
                                                       bool ties) {
  std::set<std::string> used;
  std::vector<distill::Centroid> out;
  while (out.size() < n) {
    std::string prefix = std::to_string(rng() % 100000);
    prefix.insert(0, 5 - prefix.size(), '0');
    prefix.resize(1 + rng() % 5);
    if (!used.insert(prefix).second) continue;
    double lon = ties ? double(int(rng() % 9) - 4)
                      : double(int(rng() % 2000001) - 1000000) / 1e5;
    double lat = ties ? double(int(rng() % 9) - 4)
                      : double(int(rng() % 2000001) - 1000000) / 1e5;
    out.push_back({prefix, lon, lat});
  }
  return out;
}

inline long double squared(const distill::Centroid& c, double lon, double lat) {
  long double dx = static_cast<long double>(c.lon) - lon;
  long double dy = static_cast<long double>(c.lat) - lat;
  return dx * dx + dy * dy;
}

inline std::vector<distill::Centroid> sort_by_distance(
    std::vector<distill::Centroid> cs, double lon, double lat, int k) {
  std::sort(cs.begin(), cs.end(), [&](const auto& a, const auto& b) {
    auto da = squared(a, lon, lat);
    auto db = squared(b, lon, lat);
    if (da != db) return da < db;
    return a.prefix < b.prefix;
  });
  cs.resize(std::min(cs.size(), static_cast<std::size_t>(std::max(k, 0))));
  return cs;
}

struct SubsetArgmin {
  long double best_sum = 0.0L;
  std::vector<std::set<std::string>> chosen;  // every optimal subset
};

inline SubsetArgmin subset_argmin(const std::vector<distill::Centroid>& cs,
                                  double lon, double lat, int k) {
  const std::size_t n = cs.size();
  const std::size_t want = std::min<std::size_t>(n, std::max(k, 0));
  std::vector<std::pair<long double, std::set<std::string>>> all;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != want) continue;
    long double sum = 0.0L;
    std::set<std::string> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        sum += std::sqrt(squared(cs[i], lon, lat));
        members.insert(cs[i].prefix);
      }
    }
    all.emplace_back(sum, std::move(members));
  }
  SubsetArgmin out;
  out.best_sum = all.front().first;
  for (const auto& [sum, _] : all) out.best_sum = std::min(out.best_sum, sum);
  for (auto& [sum, members] : all) {
    if (sum - out.best_sum <= 1e-12L * (1.0L + out.best_sum)) {
      out.chosen.push_back(members);
    }
  }
  return out;
}

template <typename Neighbours>
bool same_members(const Neighbours& got,
                  const std::vector<std::set<std::string>>& optimal) {
  std::set<std::string> members;
  for (const auto& n : got) members.insert(n.centroid.prefix);
  if (members.size() != got.size()) return false;
  return std::find(optimal.begin(), optimal.end(), members) != optimal.end();
}

}  // namespace fdbs::oracle
