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

// Stands up a tree of federations in process. Every federation node owns a
// cluster, a catalog, an engine, and a gateway. Leaves are deployments in
// their parent's cluster; child federations are external-endpoint services
// in their parent's cluster, so a parent sees them only through the same
// read grammar a leaf answers.
//
// Topology files:
//
//   # fdbs topology 1
//   seed 7
//   readiness_delay 2
//   replicas 2
//   crossover 3000
//   leaf leaf-0 shards/leaf-0.img
//   federation west leaf-0,leaf-1
//   federation root west,leaf-2
//   root root
//
// Without federation lines the root is a flat federation over every leaf.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fdbs/catalog.hpp"
#include "fdbs/clustersim.hpp"
#include "fdbs/engine.hpp"
#include "fdbs/federation_api.hpp"

namespace fdbs::topology {

struct LeafSpec {
  std::string name;
  std::string image_path;  // may be empty when images are supplied directly
};

struct FederationSpec {
  std::string name;
  std::vector<std::string> children;
};

struct TopologySpec {
  std::uint64_t seed = 1;
  int readiness_delay = 2;
  int replicas = 1;
  double crossover = 3000.0;
  std::vector<LeafSpec> leaves;
  std::vector<FederationSpec> federations;
  std::string root = "root";
};

// Throws FormatError.
TopologySpec parse_topology(std::string_view text);
std::string format_topology(const TopologySpec& spec);

class Node {
 public:
  Node(std::string name, sim::ClusterOptions cluster_options,
       cost::CostModel model, engine::EngineOptions engine_options);

  const std::string& name() const { return name_; }
  sim::Cluster& cluster() { return cluster_; }
  const sim::Cluster& cluster() const { return cluster_; }
  catalog::Catalog& catalog() { return catalog_; }
  const engine::Engine& engine() const { return engine_; }
  api::ApiResponse handle(const api::ApiRequest& request) const {
    return api_.handle(request);
  }
  // Union of everything registered here.
  Coverage coverage() const;

 private:
  std::string name_;
  sim::Cluster cluster_;
  catalog::Catalog catalog_;
  engine::Engine engine_;
  api::FederationApi api_;
};

class Topology {
 public:
  // `images` maps leaf names to their images. Throws InvalidSpec for
  // unknown or repeated names and cycles.
  static std::unique_ptr<Topology> build(
      const TopologySpec& spec,
      const std::map<std::string, std::shared_ptr<const ShardImage>>& images);

  Node& root() { return *nodes_.at(root_); }
  Node& node(const std::string& name);
  std::vector<std::string> node_names() const;
  // The node whose cluster runs the leaf's deployment.
  Node& home_of(const std::string& leaf);
  api::ApiResponse handle(const api::ApiRequest& request) {
    return root().handle(request);
  }

 private:
  Topology() = default;
  Node& build_node(const TopologySpec& spec, const std::string& name,
                   const std::map<std::string, std::shared_ptr<const ShardImage>>& images,
                   std::vector<std::string>& stack);

  std::map<std::string, std::unique_ptr<Node>> nodes_;
  std::map<std::string, std::string> leaf_home_;
  std::string root_;
};

}  // namespace fdbs::topology
