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

// Test scaffolding without a gtest dependency: synthetic data, ready-made
// images, and a trace replayer that recomputes pod phases from trace lines
// alone.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fdbs/clustersim.hpp"
#include "fdbs/error.hpp"
#include "fdbs/geostore.hpp"

namespace fdbs::testing {

inline std::vector<GeoRecord> synth(std::size_t n, std::uint64_t seed = 7) {
  std::vector<std::string> themes{"postcode", "climate"};
  return generate_records(n, seed, themes);
}

inline std::shared_ptr<const ShardImage> image_of(
    const std::string& id, std::vector<GeoRecord> records,
    std::int64_t version = 1) {
  std::vector<std::string> prefixes{"0", "1", "2", "3", "4",
                                    "5", "6", "7", "8", "9"};
  return std::make_shared<const ShardImage>(
      build_image(id, std::move(records),
                  Coverage::of_prefixes(prefixes), version));
}

// One image per leading digit, named "leaf-<d>", each covering prefix <d>.
inline std::vector<std::shared_ptr<const ShardImage>> first_digit_images(
    const std::vector<GeoRecord>& records, std::int64_t version = 1) {
  std::vector<std::shared_ptr<const ShardImage>> out;
  for (auto& [prefix, part] : partition_by_prefix(records, 1)) {
    out.push_back(std::make_shared<const ShardImage>(
        build_image("leaf-" + prefix, part, Coverage::of_prefixes({prefix}),
                    version)));
  }
  return out;
}

// Replays "Pending"/"Ready"/"Terminating"/"Gone" lines and reports the
// smallest Ready count per deployment seen after each line from index
// `from_line` on.
struct TraceReplay {
  std::map<std::string, std::string> phase;  // pod id -> phase
  std::map<std::string, int> min_ready;

  static std::string owner(const std::string& pod_id) {
    return pod_id.substr(0, pod_id.rfind('-'));
  }

  int ready(const std::string& dep) const {
    int n = 0;
    for (const auto& [pod, ph] : phase) {
      if (ph == "Ready" && owner(pod) == dep) ++n;
    }
    return n;
  }

  void replay(const std::vector<sim::Transition>& trace,
              std::size_t from_line) {
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const auto& t = trace[i];
      if (!t.entity.starts_with("pod:")) continue;
      auto pod = t.entity.substr(4);
      auto word = t.transition.substr(0, t.transition.find(' '));
      if (word == "Gone") {
        phase.erase(pod);
      } else {
        phase[pod] = word;
      }
      if (i >= from_line) {
        auto dep = owner(pod);
        int r = ready(dep);
        auto it = min_ready.find(dep);
        if (it == min_ready.end() || r < it->second) min_ready[dep] = r;
      }
    }
  }
};

}  // namespace fdbs::testing
