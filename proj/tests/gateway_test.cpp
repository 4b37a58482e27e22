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

#include <gtest/gtest.h>

#include <random>

#include "fdbs/server.hpp"
#include "fdbs/shard_api.hpp"
#include "fixtures.hpp"
#include "knn_oracle.hpp"
#include "oracles.hpp"
#include "topologies.hpp"

namespace fdbs::api {
namespace {

namespace T = fdbs::testing;

std::vector<GeoRecord> canon(std::vector<GeoRecord> rs) {
  for (auto& r : rs) r = canonicalize(r);
  return rs;
}

class Gateway : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    records_ = new std::vector<GeoRecord>(canon(T::synth(2000, 13)));
    images_ = new T::ImageMap(T::leaf_images(*records_));
    flat_ = T::flat_topology(*images_).release();
  }
  static void TearDownTestSuite() {
    delete flat_;
    delete images_;
    delete records_;
  }

  static ApiResponse get(const std::string& path,
                         std::map<std::string, std::string> params = {}) {
    return flat_->handle(ApiRequest::get(path, std::move(params)));
  }

  static std::vector<GeoRecord>* records_;
  static T::ImageMap* images_;
  static topology::Topology* flat_;
};

std::vector<GeoRecord>* Gateway::records_ = nullptr;
T::ImageMap* Gateway::images_ = nullptr;
topology::Topology* Gateway::flat_ = nullptr;

Json oracle_records(const std::vector<GeoRecord>& rs) {
  Json out = Json::array();
  for (const auto& r : rs) out.push_back(record_json(r));
  return out;
}

TEST_F(Gateway, RecordsWindow) {
  auto r = get("/records", {{"prefix", "4"}, {"offset", "10"}, {"limit", "5"}});
  ASSERT_EQ(r.status, 200) << r.text();
  QueryPredicate p;
  p.prefix = "4";
  EXPECT_EQ(r.body["count"], oracle::brute_count(*records_, p));
  EXPECT_EQ(r.body["offset"], 10);
  EXPECT_EQ(r.body["limit"], 5);
  EXPECT_EQ(r.body["records"],
            oracle_records(oracle::filter_sort_slice(*records_, p, 10, 5)));
  EXPECT_FALSE(r.source.empty());
}

TEST_F(Gateway, BadPrefixNamesParameter) {
  auto r = get("/records", {{"prefix", "42x"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_NE(r.body["error"]["message"].get<std::string>().find("prefix"),
            std::string::npos);
  r = get("/count", {{"colour", "red"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_NE(r.body["error"]["message"].get<std::string>().find("colour"),
            std::string::npos);
  r = get("/records", {{"bbox", "1,2,3"}});
  EXPECT_EQ(r.status, 400);
  r = get("/records", {{"limit", "-1"}});
  EXPECT_EQ(r.status, 400);
  r = get("/groups");
  EXPECT_EQ(r.status, 400);  // zoom is required
}

TEST_F(Gateway, UnknownPathIs404) {
  EXPECT_EQ(get("/nope").status, 404);
  EXPECT_EQ(get("/nope").body["error"]["code"], "NotFound");
  auto shard = ShardApi(images_->begin()->second);
  EXPECT_EQ(shard.handle(ApiRequest::get("/admin/deploy")).status, 404);
}

TEST_F(Gateway, ReadinessGatesReads) {
  ShardApi shard(images_->at("leaf-3"), false);
  EXPECT_EQ(shard.handle(ApiRequest::get("/healthz")).status, 200);
  EXPECT_EQ(shard.handle(ApiRequest::get("/readyz")).status, 503);
  EXPECT_EQ(shard.handle(ApiRequest::get("/count")).status, 503);
  shard.set_ready(true);
  EXPECT_EQ(shard.handle(ApiRequest::get("/readyz")).status, 200);
  auto r = shard.handle(ApiRequest::get("/count"));
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["count"], images_->at("leaf-3")->record_count());
}

TEST_F(Gateway, PagingReconstructsFullResult) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 40; ++i) {
    auto p = oracle::random_predicate(rng);
    auto params = predicate_params(p);
    auto whole = get("/records", params);
    ASSERT_EQ(whole.status, 200);
    std::size_t page = 1 + rng() % 60;
    Json pieces = Json::array();
    for (std::size_t off = 0;; off += page) {
      auto q = params;
      q["offset"] = std::to_string(off);
      q["limit"] = std::to_string(page);
      auto r = get("/records", q);
      ASSERT_EQ(r.status, 200);
      EXPECT_EQ(r.body["count"], whole.body["count"]);
      for (auto& rec : r.body["records"]) pieces.push_back(rec);
      if (r.body["records"].size() < page) break;
    }
    EXPECT_EQ(pieces, whole.body["records"]);
  }
}

TEST_F(Gateway, RepeatedRequestsByteIdentical) {
  for (const char* path : {"/records", "/count", "/groups", "/centroids"}) {
    std::map<std::string, std::string> q{{"bbox", "-100,-80,30,45"}};
    if (std::string(path) != "/records" && std::string(path) != "/count") {
      q["zoom"] = "5";
    }
    EXPECT_EQ(get(path, q).text(), get(path, q).text()) << path;
  }
}

TEST_F(Gateway, LeafAndFederationAgree) {
  ShardApi leaf(images_->at("leaf-6"));
  std::mt19937_64 rng(44);
  for (int i = 0; i < 30; ++i) {
    auto p = oracle::random_predicate(rng);
    p.prefix = "6" + p.prefix.value_or("").substr(0, 2);
    p.match_all = false;
    auto params = predicate_params(p);
    params["limit"] = "25";
    for (const char* path : {"/records", "/count"}) {
      auto a = leaf.handle(ApiRequest::get(path, params));
      auto b = get(path, params);
      EXPECT_EQ(a.text(), b.text()) << path;
      EXPECT_NE(a.source, b.source);
    }
  }
}

TEST_F(Gateway, CentroidsAndKnn) {
  auto c = get("/centroids", {{"zoom", "2"}});
  ASSERT_EQ(c.status, 200);
  auto want = oracle::group_means(*records_, distill::prefix_len_for_zoom(2));
  ASSERT_EQ(c.body["centroids"].size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(c.body["centroids"][i]["prefix"], want[i].prefix);
    EXPECT_NEAR(c.body["centroids"][i]["lon"].get<double>(), want[i].lon, 1e-9);
  }
  auto k = get("/knn", {{"zoom", "1"}, {"lon", "-95"}, {"lat", "38"}, {"k", "3"}});
  ASSERT_EQ(k.status, 200) << k.text();
  EXPECT_EQ(k.body["neighbours"].size(), 3u);
  EXPECT_EQ(get("/knn", {{"zoom", "1"}, {"lon", "0"}, {"lat", "0"}}).status, 400);
}

TEST_F(Gateway, CatalogListsEntries) {
  auto r = get("/catalog");
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body["entries"].size(), 10u);
  EXPECT_EQ(r.body["entries"][0]["name"], "leaf-0");
  EXPECT_EQ(r.body["entries"][0]["coverage"], "prefix:0");
}

TEST(GatewayAdmin, KillUpdateDeploy) {
  auto records = canon(T::synth(500, 2));
  auto images = T::leaf_images(records);
  auto topo = T::flat_topology(images, 3);
  auto& root = topo->root();
  using Params = std::map<std::string, std::string>;
  auto post = [&](std::string path, Params q) {
    return root.handle(ApiRequest{"POST", std::move(path), std::move(q)});
  };
  EXPECT_EQ(root.handle(ApiRequest::get("/admin/kill-pod", {{"pod", "x"}})).status,
            400);
  EXPECT_EQ(post("/admin/kill-pod", {{"pod", "nope"}}).status, 404);
  auto pod = root.cluster().pods("leaf-2").front().pod_id;
  auto k = post("/admin/kill-pod", {{"pod", pod}});
  ASSERT_EQ(k.status, 200) << k.text();
  EXPECT_FALSE(k.body["transitions"].empty());

  auto v2 = std::make_shared<const ShardImage>(
      build_image("leaf-2",
                  std::vector<GeoRecord>(images.at("leaf-2")->records().begin(),
                                         images.at("leaf-2")->records().end()),
                  images.at("leaf-2")->coverage(), 2));
  root.cluster().register_image(v2);
  Params upd{{"deployment", "leaf-2"}, {"image", v2->reference()}};
  auto u = post("/admin/update", upd);
  ASSERT_EQ(u.status, 200) << u.text();
  EXPECT_FALSE(u.body["no_op"].get<bool>());
  EXPECT_GE(u.body["min_ready"].get<int>(), 2);
  u = post("/admin/update", upd);
  EXPECT_TRUE(u.body["no_op"].get<bool>());

  EXPECT_EQ(post("/admin/deploy", {{"deployment", "extra"}, {"image", "none@v1"}}).status,
            404);
  auto d = post("/admin/deploy", Params{{"deployment", "extra"},
                                        {"image", v2->reference()},
                                        {"replicas", "2"}});
  ASSERT_EQ(d.status, 200) << d.text();
  EXPECT_EQ(root.catalog().size(), 11u);
}

TEST(GatewayHttp, RoundTripOverSocket) {
  auto records = canon(T::synth(300, 5));
  auto images = T::leaf_images(records);
  auto topo = T::flat_topology(images);
  server::HttpServer srv([&](const ApiRequest& r) { return topo->handle(r); });
  int port = srv.start();
  auto direct = topo->handle(ApiRequest::get("/records", {{"prefix", "3"}}));
  auto r = server::http_request("127.0.0.1", port,
                                ApiRequest::get("/records", {{"prefix", "3"}}));
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body, direct.text());
  EXPECT_NE(r.source.find("engine:root"), std::string::npos);
  auto bad = server::http_request("127.0.0.1", port,
                                  ApiRequest::get("/count", {{"prefix", "3x"}}));
  EXPECT_EQ(bad.status, 400);
  // Bind conflict is a startup failure.
  server::HttpServer other([](const ApiRequest&) { return ApiResponse{}; });
  EXPECT_EQ(T::error_code_of([&] { other.start("127.0.0.1", port); }),
            Errc::StartupFailure);
  srv.stop();
  EXPECT_EQ(T::error_code_of([&] {
              server::http_request("127.0.0.1", port, ApiRequest::get("/healthz"));
            }),
            Errc::ServiceUnavailable);
}

}  // namespace
}  // namespace fdbs::api
