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

// Request/response types and the read grammar shared by shard and federation
// gateways.
//
//   GET /records    prefix theme bbox offset limit
//   GET /count      prefix theme bbox
//   GET /groups     zoom + predicate
//   GET /centroids  zoom + predicate
//   GET /knn        zoom lon lat k + predicate
//   GET /catalog, /healthz, /readyz
//
// bbox is "lonmin,lonmax,latmin,latmax". Bodies are JSON with keys in
// alphabetical order; record coordinates and aggregate sums are fixed
// 6-decimal strings.

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdbs/distill.hpp"
#include "fdbs/error.hpp"
#include "fdbs/geostore.hpp"

namespace fdbs::api {

using Json = nlohmann::json;

struct ApiRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> params;

  static ApiRequest get(std::string path,
                        std::map<std::string, std::string> params = {}) {
    return ApiRequest{"GET", std::move(path), std::move(params)};
  }
};

struct ApiResponse {
  int status = 200;
  Json body = Json::object();
  // Service/pod chain that produced the response; not part of the body.
  std::vector<std::string> source;

  std::string text() const { return body.dump(); }
  bool ok() const { return status == 200; }
};

using ApiHandler = std::function<ApiResponse(const ApiRequest&)>;

inline constexpr const char* kSourceHeader = "X-Fdbs-Source";

// Parsed and validated query parameters.
struct ReadQuery {
  QueryPredicate pred;
  ScanRange window;
  std::optional<std::size_t> limit;  // as given, for echoing back
  std::optional<int> zoom;
  double lon = 0.0;
  double lat = 0.0;
  std::optional<int> k;
};

// Throws Error(BadRequest) naming the offending parameter.
ReadQuery parse_read_query(const std::map<std::string, std::string>& params);

// Inverse of parse_read_query for the predicate and paging parameters.
std::map<std::string, std::string> predicate_params(const QueryPredicate& pred);

Json record_json(const GeoRecord& r);
GeoRecord record_from_json(const Json& j);
Json aggregate_json(const distill::GroupAggregate& g);
distill::GroupAggregate aggregate_from_json(const Json& j);

Json records_body(std::size_t total, const ReadQuery& q,
                  std::span<const GeoRecord> page);
Json count_body(std::size_t count);
Json groups_body(int zoom, std::span<const distill::GroupAggregate> groups);
Json centroids_body(int zoom, std::span<const distill::Centroid> centroids);
Json knn_body(const ReadQuery& q, std::span<const distill::Neighbour> hits);

ApiResponse error_response(int status, std::string_view code,
                           const std::string& message);
// Maps library errors onto HTTP statuses.
ApiResponse error_response(const Error& e);
int http_status_for(Errc code) noexcept;

// Throws the Error a non-200 response describes.
[[noreturn]] void raise_from(const ApiResponse& response,
                             const std::string& context);

std::string format_source(const std::vector<std::string>& source);
std::vector<std::string> parse_source(std::string_view header);

// Answers the read grammar for callers that can produce records, counts, and
// aggregates; shard and federation gateways differ only in the backend.
class ReadBackend {
 public:
  virtual ~ReadBackend() = default;
  // Total matching count and the requested window, canonical order.
  virtual std::pair<std::size_t, std::vector<GeoRecord>> records(
      const QueryPredicate& pred, ScanRange window,
      std::vector<std::string>& source) const = 0;
  virtual std::size_t count(const QueryPredicate& pred,
                            std::vector<std::string>& source) const = 0;
  virtual std::vector<distill::GroupAggregate> groups(
      const QueryPredicate& pred, int zoom,
      std::vector<std::string>& source) const = 0;
};

// Dispatches /records /count /groups /centroids /knn against `backend`.
// Returns nullopt for paths outside the read grammar.
std::optional<ApiResponse> handle_read(const ReadBackend& backend,
                                       const ApiRequest& request);

}  // namespace fdbs::api
