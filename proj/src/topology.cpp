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

#include "fdbs/topology.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "fdbs/text.hpp"

namespace fdbs::topology {

namespace {

[[noreturn]] void bad_line(std::size_t n, const std::string& msg) {
  throw Error(Errc::FormatError,
              "topology line " + std::to_string(n) + ": " + msg);
}

template <typename T>
T number(std::size_t n, std::string_view s) {
  T v{};
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    bad_line(n, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  for (auto f : split(line, ' ')) {
    if (!f.empty()) out.push_back(f);
  }
  return out;
}

}  // namespace

TopologySpec parse_topology(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]) != "# fdbs topology 1") {
    throw Error(Errc::FormatError, "not a topology document");
  }
  TopologySpec spec;
  bool have_root = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto f = fields(line);
    auto n = i + 1;
    if (f[0] == "seed" && f.size() == 2) {
      spec.seed = number<std::uint64_t>(n, f[1]);
    } else if (f[0] == "readiness_delay" && f.size() == 2) {
      spec.readiness_delay = number<int>(n, f[1]);
    } else if (f[0] == "replicas" && f.size() == 2) {
      spec.replicas = number<int>(n, f[1]);
    } else if (f[0] == "crossover" && f.size() == 2) {
      spec.crossover = number<double>(n, f[1]);
    } else if (f[0] == "leaf" && f.size() == 3) {
      spec.leaves.push_back({std::string(f[1]), std::string(f[2])});
    } else if (f[0] == "federation" && f.size() == 3) {
      FederationSpec fed{std::string(f[1]), {}};
      for (auto c : split(f[2], ',')) fed.children.emplace_back(c);
      spec.federations.push_back(std::move(fed));
    } else if (f[0] == "root" && f.size() == 2) {
      spec.root = std::string(f[1]);
      have_root = true;
    } else {
      bad_line(n, "cannot parse '" + std::string(line) + "'");
    }
  }
  if (!have_root && !spec.federations.empty()) {
    throw Error(Errc::FormatError, "topology with federations needs a root line");
  }
  return spec;
}

std::string format_topology(const TopologySpec& spec) {
  std::string out = "# fdbs topology 1\n";
  out += "seed " + std::to_string(spec.seed) + "\n";
  out += "readiness_delay " + std::to_string(spec.readiness_delay) + "\n";
  out += "replicas " + std::to_string(spec.replicas) + "\n";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), spec.crossover);
  out += "crossover " + std::string(buf, end) + "\n";
  for (const auto& l : spec.leaves) out += "leaf " + l.name + " " + l.image_path + "\n";
  for (const auto& f : spec.federations) {
    out += "federation " + f.name + " " + join(f.children, ",") + "\n";
  }
  out += "root " + spec.root + "\n";
  return out;
}

Node::Node(std::string name, sim::ClusterOptions cluster_options,
           cost::CostModel model, engine::EngineOptions engine_options)
    : name_(std::move(name)),
      cluster_(cluster_options),
      engine_(catalog_,
              [this](const std::string& id, const api::ApiRequest& r) {
                return cluster_.call(id, r);
              },
              std::move(model), std::move(engine_options)),
      api_(engine_, catalog_, &cluster_) {}

Coverage Node::coverage() const {
  std::vector<Coverage> parts;
  for (const auto& e : const_cast<catalog::Catalog&>(catalog_).snapshot()) {
    parts.push_back(e.coverage);
  }
  if (parts.empty()) {
    throw Error(Errc::InvalidSpec, "federation " + name_ + " covers nothing");
  }
  return Coverage::union_of(std::move(parts));
}

std::unique_ptr<Topology> Topology::build(
    const TopologySpec& spec,
    const std::map<std::string, std::shared_ptr<const ShardImage>>& images) {
  std::set<std::string> names;
  for (const auto& l : spec.leaves) {
    if (!names.insert(l.name).second) {
      throw Error(Errc::InvalidSpec, "topology name " + l.name + " is repeated");
    }
    if (!images.contains(l.name)) {
      throw Error(Errc::ImageNotFound, "no image for leaf " + l.name);
    }
  }
  for (const auto& f : spec.federations) {
    if (!names.insert(f.name).second) {
      throw Error(Errc::InvalidSpec, "topology name " + f.name + " is repeated");
    }
  }
  TopologySpec effective = spec;
  if (effective.federations.empty()) {
    FederationSpec flat{effective.root, {}};
    for (const auto& l : effective.leaves) flat.children.push_back(l.name);
    effective.federations.push_back(std::move(flat));
  }
  std::unique_ptr<Topology> topo(new Topology());
  topo->root_ = effective.root;
  std::vector<std::string> stack;
  topo->build_node(effective, effective.root, images, stack);
  return topo;
}

Node& Topology::build_node(
    const TopologySpec& spec, const std::string& name,
    const std::map<std::string, std::shared_ptr<const ShardImage>>& images,
    std::vector<std::string>& stack) {
  if (std::find(stack.begin(), stack.end(), name) != stack.end()) {
    throw Error(Errc::InvalidSpec, "topology cycle through " + name);
  }
  if (nodes_.contains(name)) {
    throw Error(Errc::InvalidSpec, "federation " + name + " has two parents");
  }
  auto fed = std::find_if(spec.federations.begin(), spec.federations.end(),
                          [&](const auto& f) { return f.name == name; });
  if (fed == spec.federations.end()) {
    throw Error(Errc::InvalidSpec, "unknown federation " + name);
  }
  stack.push_back(name);
  engine::EngineOptions eopts;
  eopts.name = name;
  auto node = std::make_unique<Node>(
      name,
      sim::ClusterOptions{spec.seed + nodes_.size(), spec.readiness_delay},
      cost::CostModel::from_crossover(spec.crossover), eopts);
  Node& self = *node;
  nodes_[name] = std::move(node);

  for (const auto& child : fed->children) {
    auto img = images.find(child);
    bool is_leaf = std::any_of(spec.leaves.begin(), spec.leaves.end(),
                               [&](const auto& l) { return l.name == child; });
    if (is_leaf) {
      if (leaf_home_.contains(child)) {
        throw Error(Errc::InvalidSpec, "leaf " + child + " has two parents");
      }
      leaf_home_[child] = name;
      self.cluster().register_image(img->second);
      sim::DeploymentSpec dep;
      dep.deployment_id = child;
      dep.replicas = spec.replicas;
      dep.image_id = img->second->reference();
      self.cluster().apply_deployment(dep);
      self.cluster().create_service(
          {child, {{"app", child}}, sim::Policy::RoundRobin, {}});
      catalog::CatalogEntry entry;
      entry.name = child;
      entry.service_id = child;
      entry.coverage = img->second->coverage();
      self.catalog().register_entry(entry);
      continue;
    }
    Node& sub = build_node(spec, child, images, stack);
    auto* sub_ptr = &sub;
    engine::federate(self.catalog(), self.cluster(), child, "fed://" + child,
                     [sub_ptr](const api::ApiRequest& r) { return sub_ptr->handle(r); },
                     sub.coverage());
  }
  self.cluster().settle();
  stack.pop_back();
  return self;
}

Node& Topology::node(const std::string& name) {
  auto it = nodes_.find(name);
  if (it == nodes_.end()) {
    throw Error(Errc::NotFound, "no federation " + name);
  }
  return *it->second;
}

std::vector<std::string> Topology::node_names() const {
  std::vector<std::string> out;
  for (const auto& [name, node] : nodes_) out.push_back(name);
  return out;
}

Node& Topology::home_of(const std::string& leaf) {
  auto it = leaf_home_.find(leaf);
  if (it == leaf_home_.end()) throw Error(Errc::NotFound, "no leaf " + leaf);
  return node(it->second);
}

}  // namespace fdbs::topology
