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

#include "fdbs/api.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "fdbs/text.hpp"

namespace fdbs::api {

namespace {

const std::set<std::string>& known_params() {
  static const std::set<std::string> kParams{
      "bbox", "k", "lat", "limit", "lon", "offset", "prefix", "theme", "zoom"};
  return kParams;
}

[[noreturn]] void bad_param(const std::string& name, const std::string& why) {
  throw Error(Errc::BadRequest, "invalid parameter '" + name + "': " + why);
}

template <typename T>
T parse_number(const std::string& name, std::string_view text) {
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    bad_param(name, "not a number: '" + std::string(text) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) bad_param(name, "must be finite");
  }
  return value;
}

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string require(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(Errc::FormatError,
                std::string("response field '") + key + "' missing");
  }
  return j.at(key).get<std::string>();
}

MicroDegrees micro_field(const Json& j, const char* key) {
  auto value = parse_micro(require(j, key));
  if (!value) {
    throw Error(Errc::FormatError,
                std::string("response field '") + key + "' is not decimal");
  }
  return *value;
}

}  // namespace

ReadQuery parse_read_query(const std::map<std::string, std::string>& params) {
  ReadQuery q;
  for (const auto& [name, value] : params) {
    if (!known_params().contains(name)) bad_param(name, "unknown parameter");
  }
  if (auto it = params.find("prefix"); it != params.end()) {
    if (!is_valid_prefix(it->second)) bad_param("prefix", "must be 1-5 digits");
    q.pred.prefix = it->second;
  }
  if (auto it = params.find("theme"); it != params.end()) {
    if (!is_valid_theme(it->second)) bad_param("theme", "must be a tag");
    q.pred.theme = it->second;
  }
  if (auto it = params.find("bbox"); it != params.end()) {
    auto parts = split(it->second, ',');
    if (parts.size() != 4) {
      bad_param("bbox", "expected lonmin,lonmax,latmin,latmax");
    }
    BBox b{parse_number<double>("bbox", parts[0]),
           parse_number<double>("bbox", parts[1]),
           parse_number<double>("bbox", parts[2]),
           parse_number<double>("bbox", parts[3])};
    if (!(b.lon_min < b.lon_max) || !(b.lat_min < b.lat_max)) {
      bad_param("bbox", "requires lonmin < lonmax and latmin < latmax");
    }
    if (b.lon_min < -180.0 || b.lon_max > 180.0 || b.lat_min < -90.0 ||
        b.lat_max > 90.0) {
      bad_param("bbox", "exceeds coordinate ranges");
    }
    q.pred.bbox = b;
  }
  if (q.pred.empty_filter()) q.pred.match_all = true;

  if (auto it = params.find("offset"); it != params.end()) {
    auto v = parse_number<long long>("offset", it->second);
    if (v < 0) bad_param("offset", "must be >= 0");
    q.window.offset = static_cast<std::size_t>(v);
  }
  if (auto it = params.find("limit"); it != params.end()) {
    auto v = parse_number<long long>("limit", it->second);
    if (v < 0) bad_param("limit", "must be >= 0");
    q.limit = static_cast<std::size_t>(v);
    q.window.limit = *q.limit;
  }
  if (auto it = params.find("zoom"); it != params.end()) {
    q.zoom = parse_number<int>("zoom", it->second);
  }
  if (auto it = params.find("lon"); it != params.end()) {
    q.lon = parse_number<double>("lon", it->second);
    if (q.lon < -180.0 || q.lon > 180.0) bad_param("lon", "out of range");
  }
  if (auto it = params.find("lat"); it != params.end()) {
    q.lat = parse_number<double>("lat", it->second);
    if (q.lat < -90.0 || q.lat > 90.0) bad_param("lat", "out of range");
  }
  if (auto it = params.find("k"); it != params.end()) {
    q.k = parse_number<int>("k", it->second);
  }
  return q;
}

std::map<std::string, std::string> predicate_params(const QueryPredicate& p) {
  std::map<std::string, std::string> out;
  if (p.prefix) out["prefix"] = *p.prefix;
  if (p.theme) out["theme"] = *p.theme;
  if (p.bbox) {
    out["bbox"] = shortest(p.bbox->lon_min) + "," + shortest(p.bbox->lon_max) +
                  "," + shortest(p.bbox->lat_min) + "," +
                  shortest(p.bbox->lat_max);
  }
  return out;
}

Json record_json(const GeoRecord& r) {
  return Json{{"lat", format_fixed6(r.lat)},
              {"lon", format_fixed6(r.lon)},
              {"payload", r.payload},
              {"postcode", r.postcode},
              {"theme", r.theme}};
}

GeoRecord record_from_json(const Json& j) {
  GeoRecord r;
  r.postcode = require(j, "postcode");
  r.theme = require(j, "theme");
  r.payload = require(j, "payload");
  r.lon = from_micro(micro_field(j, "lon"));
  r.lat = from_micro(micro_field(j, "lat"));
  return r;
}

Json aggregate_json(const distill::GroupAggregate& g) {
  return Json{{"count", g.count},
              {"prefix", g.prefix},
              {"sum_lat", format_micro(g.sum_lat)},
              {"sum_lon", format_micro(g.sum_lon)}};
}

distill::GroupAggregate aggregate_from_json(const Json& j) {
  distill::GroupAggregate g;
  g.prefix = require(j, "prefix");
  g.count = j.at("count").get<std::int64_t>();
  g.sum_lon = micro_field(j, "sum_lon");
  g.sum_lat = micro_field(j, "sum_lat");
  return g;
}

Json records_body(std::size_t total, const ReadQuery& q,
                  std::span<const GeoRecord> page) {
  Json records = Json::array();
  for (const auto& r : page) records.push_back(record_json(r));
  return Json{{"count", total},
              {"limit", q.limit ? Json(*q.limit) : Json(nullptr)},
              {"offset", q.window.offset},
              {"records", std::move(records)}};
}

Json count_body(std::size_t count) { return Json{{"count", count}}; }

Json groups_body(int zoom, std::span<const distill::GroupAggregate> groups) {
  Json list = Json::array();
  for (const auto& g : groups) list.push_back(aggregate_json(g));
  return Json{{"groups", std::move(list)},
              {"prefix_len", distill::prefix_len_for_zoom(zoom)},
              {"total", groups.size()},
              {"zoom", zoom}};
}

Json centroids_body(int zoom, std::span<const distill::Centroid> centroids) {
  Json list = Json::array();
  for (const auto& c : centroids) {
    list.push_back(Json{{"lat", c.lat}, {"lon", c.lon}, {"prefix", c.prefix}});
  }
  return Json{{"centroids", std::move(list)},
              {"prefix_len", distill::prefix_len_for_zoom(zoom)},
              {"total", centroids.size()},
              {"zoom", zoom}};
}

Json knn_body(const ReadQuery& q, std::span<const distill::Neighbour> hits) {
  Json list = Json::array();
  for (const auto& n : hits) {
    list.push_back(Json{{"distance", n.distance},
                        {"lat", n.centroid.lat},
                        {"lon", n.centroid.lon},
                        {"prefix", n.centroid.prefix}});
  }
  return Json{{"k", q.k.value_or(-1)},
              {"lat", q.lat},
              {"lon", q.lon},
              {"neighbours", std::move(list)},
              {"total", hits.size()},
              {"zoom", q.zoom.value_or(0)}};
}

ApiResponse error_response(int status, std::string_view code,
                           const std::string& message) {
  ApiResponse r;
  r.status = status;
  r.body = Json{{"error", Json{{"code", code}, {"message", message}}}};
  return r;
}

int http_status_for(Errc code) noexcept {
  switch (code) {
    case Errc::BadRequest:
    case Errc::InvalidPredicate:
    case Errc::InvalidPrefixLen:
    case Errc::InvalidSpec:
      return 400;
    case Errc::NotFound:
    case Errc::NoCoverage:
    case Errc::UnknownPod:
    case Errc::UnknownService:
    case Errc::UnknownDeployment:
    case Errc::ImageNotFound:
      return 404;
    case Errc::NameConflict:
      return 409;
    case Errc::ServiceUnavailable:
    case Errc::UnreachableChild:
    case Errc::PartialFailure:
    case Errc::UpdateStalled:
      return 503;
    default:
      return 500;
  }
}

ApiResponse error_response(const Error& e) {
  return error_response(http_status_for(e.code()), errc_name(e.code()),
                        e.what());
}

void raise_from(const ApiResponse& response, const std::string& context) {
  Errc code = response.status == 503 ? Errc::ServiceUnavailable
                                     : Errc::PartialFailure;
  std::string message = "status " + std::to_string(response.status);
  if (response.body.contains("error")) {
    const auto& err = response.body.at("error");
    if (auto parsed = errc_from_name(err.value("code", ""))) code = *parsed;
    message = err.value("message", message);
  }
  throw Error(code, context + ": " + message);
}

std::string format_source(const std::vector<std::string>& source) {
  return join(source, ",");
}

std::vector<std::string> parse_source(std::string_view header) {
  std::vector<std::string> out;
  if (header.empty()) return out;
  for (auto part : split(header, ',')) out.emplace_back(part);
  return out;
}

std::optional<ApiResponse> handle_read(const ReadBackend& backend,
                                       const ApiRequest& request) {
  const auto& path = request.path;
  if (path != "/records" && path != "/count" && path != "/groups" &&
      path != "/centroids" && path != "/knn") {
    return std::nullopt;
  }
  try {
    if (request.method != "GET") {
      throw Error(Errc::BadRequest, "method " + request.method +
                                        " not allowed on " + path);
    }
    auto q = parse_read_query(request.params);
    ApiResponse response;
    if (path == "/records") {
      auto [total, page] = backend.records(q.pred, q.window, response.source);
      response.body = records_body(total, q, page);
      return response;
    }
    if (path == "/count") {
      response.body = count_body(backend.count(q.pred, response.source));
      return response;
    }
    if (!q.zoom) bad_param("zoom", "required");
    auto groups = backend.groups(q.pred, *q.zoom, response.source);
    if (path == "/groups") {
      response.body = groups_body(*q.zoom, groups);
      return response;
    }
    auto centroids = distill::centroids(groups);
    if (path == "/centroids") {
      response.body = centroids_body(*q.zoom, centroids);
      return response;
    }
    if (!q.k) bad_param("k", "required");
    if (*q.k < 0) bad_param("k", "must be >= 0");
    auto hits = distill::knn(centroids, q.lon, q.lat, *q.k);
    response.body = knn_body(q, hits);
    return response;
  } catch (const Error& e) {
    return error_response(e);
  }
}

}  // namespace fdbs::api
