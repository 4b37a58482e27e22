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

#pragma once

#include <atomic>
#include <memory>

#include "fdbs/api.hpp"
#include "fdbs/geostore.hpp"

namespace fdbs::api {

// The per-shard gateway: the api container of a pod, reading one image.
class ShardApi : public ReadBackend {
 public:
  explicit ShardApi(std::shared_ptr<const ShardImage> image,
                    bool ready = true);

  // Flips /readyz; reads answer 503 until then.
  void set_ready(bool ready) { ready_.store(ready); }
  bool ready() const { return ready_.load(); }
  const ShardImage& image() const { return *image_; }

  ApiResponse handle(const ApiRequest& request) const;

  std::pair<std::size_t, std::vector<GeoRecord>> records(
      const QueryPredicate& pred, ScanRange window,
      std::vector<std::string>& source) const override;
  std::size_t count(const QueryPredicate& pred,
                    std::vector<std::string>& source) const override;
  std::vector<distill::GroupAggregate> groups(
      const QueryPredicate& pred, int zoom,
      std::vector<std::string>& source) const override;

 private:
  std::shared_ptr<const ShardImage> image_;
  std::atomic<bool> ready_;
};

Json image_json(const ShardImage& image);

}  // namespace fdbs::api
