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

#include "fdbs/shard_api.hpp"

namespace fdbs::api {

ShardApi::ShardApi(std::shared_ptr<const ShardImage> image, bool ready)
    : image_(std::move(image)), ready_(ready) {
  if (!image_) throw Error(Errc::StartupFailure, "shard gateway needs an image");
}

Json image_json(const ShardImage& image) {
  return Json{{"checksum", image.checksum()},
              {"count", image.record_count()},
              {"coverage", image.coverage().expression()},
              {"id", image.id()},
              {"version", image.version()}};
}

ApiResponse ShardApi::handle(const ApiRequest& request) const {
  if (request.path == "/healthz") {
    ApiResponse r;
    r.body = Json{{"status", "ok"}};
    return r;
  }
  if (request.path == "/readyz") {
    if (!ready()) {
      return error_response(503, "ServiceUnavailable", "image not loaded");
    }
    ApiResponse r;
    r.body = Json{{"status", "ok"}};
    return r;
  }
  if (request.path == "/catalog") {
    ApiResponse r;
    r.body = Json{{"image", image_json(*image_)}};
    r.source.push_back("image:" + image_->reference());
    return r;
  }
  if (!ready()) {
    return error_response(503, "ServiceUnavailable",
                          "image " + image_->reference() + " not loaded");
  }
  if (auto r = handle_read(*this, request)) return *r;
  return error_response(404, "NotFound", "no route for " + request.path);
}

std::pair<std::size_t, std::vector<GeoRecord>> ShardApi::records(
    const QueryPredicate& pred, ScanRange window,
    std::vector<std::string>& source) const {
  source.push_back("image:" + image_->reference());
  return {fdbs::count(*image_, pred), scan(*image_, pred, window)};
}

std::size_t ShardApi::count(const QueryPredicate& pred,
                            std::vector<std::string>& source) const {
  source.push_back("image:" + image_->reference());
  return fdbs::count(*image_, pred);
}

std::vector<distill::GroupAggregate> ShardApi::groups(
    const QueryPredicate& pred, int zoom,
    std::vector<std::string>& source) const {
  source.push_back("image:" + image_->reference());
  return distill::group_aggregates(scan(*image_, pred), zoom);
}

}  // namespace fdbs::api
