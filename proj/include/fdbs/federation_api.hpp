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

#include <mutex>

#include "fdbs/api.hpp"
#include "fdbs/catalog.hpp"
#include "fdbs/clustersim.hpp"
#include "fdbs/engine.hpp"

namespace fdbs::api {

// The federation-wide gateway. Reads go through the engine; the admin group
// (POST, parameters in the query string) drives the cluster:
//
//   POST /admin/deploy    deployment image [replicas max_unavailable max_surge]
//   POST /admin/update    deployment image [max_steps]
//   POST /admin/kill-pod  pod
class FederationApi {
 public:
  // `cluster` may be null, which disables the admin group.
  FederationApi(const engine::Engine& engine, catalog::Catalog& catalog,
                sim::Cluster* cluster);

  ApiResponse handle(const ApiRequest& request) const;

 private:
  ApiResponse admin(const ApiRequest& request) const;

  const engine::Engine& engine_;
  catalog::Catalog& catalog_;
  sim::Cluster* cluster_;
  mutable std::mutex admin_mu_;
};

Json catalog_json(const std::vector<catalog::CatalogEntry>& entries);

}  // namespace fdbs::api
