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

// Discrete-step simulation of pods, label-selected services, and
// deployments with rolling updates.
//
// Time only moves in advance(). Each step first retires Terminating pods,
// then promotes Pending pods whose readiness delay has elapsed, then
// reconciles every deployment in id order. Every state change is appended to
// a trace of "step<TAB>entity<TAB>transition" lines; with the same seed and
// the same operations the trace is byte-identical.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "fdbs/api.hpp"
#include "fdbs/geostore.hpp"
#include "fdbs/shard_api.hpp"

namespace fdbs::sim {

using Labels = std::map<std::string, std::string>;

enum class Phase { Pending, Ready, Terminating, Gone };
enum class Policy { RoundRobin, LeastOutstanding };

std::string_view phase_name(Phase phase) noexcept;
std::string_view policy_name(Policy policy) noexcept;
// Throws InvalidSpec.
Policy parse_policy(std::string_view text);

// Index of the smallest in-flight count; the first one wins ties, so callers
// pass candidates in pod_id order.
std::size_t least_outstanding(std::span<const std::int64_t> in_flight);

struct DeploymentSpec {
  std::string deployment_id;
  int replicas = 1;
  Labels labels;  // pod template labels; {"app": deployment_id} when empty
  std::string image_id;  // ShardImage reference, "<id>@v<n>"
  int max_unavailable = 1;
  int max_surge = 1;

  bool operator==(const DeploymentSpec&) const = default;
};

struct ServiceSpec {
  std::string service_id;
  Labels selector;
  Policy policy = Policy::RoundRobin;
  std::optional<std::string> external_endpoint;
};

struct PodInfo {
  std::string pod_id;
  std::string deployment_id;
  Labels labels;
  std::string image_id;
  std::int64_t image_version = 0;
  Phase phase = Phase::Pending;
  std::string address;
  std::int64_t created_step = 0;
  std::int64_t in_flight = 0;
};

struct Transition {
  std::int64_t step = 0;
  std::string entity;
  std::string transition;

  std::string line() const;
  bool operator==(const Transition&) const = default;
};

std::string trace_text(const std::vector<Transition>& trace);

struct ClusterOptions {
  std::uint64_t seed = 1;
  int readiness_delay = 2;
};

struct UpdateOptions {
  std::int64_t max_steps = 100;
  // Called after every step of the update with the current step.
  std::function<void(std::int64_t)> on_step;
};

struct UpdateReport {
  bool no_op = false;
  std::int64_t steps = 0;
  int created = 0;
  int terminated = 0;
  int min_ready = 0;
  std::vector<Transition> trace;
};

class Cluster {
 public:
  explicit Cluster(ClusterOptions options = {});
  ~Cluster();
  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  const ClusterOptions& options() const { return options_; }

  // Images are addressed by ShardImage::reference().
  void register_image(std::shared_ptr<const ShardImage> image);
  bool has_image(const std::string& image_id) const;
  // Throws ImageNotFound.
  std::shared_ptr<const ShardImage> image(const std::string& image_id) const;
  // Pods of a faulted image never become Ready (models a broken image).
  void set_image_fault(const std::string& image_id, bool faulted);

  // Creates or replaces a deployment and reconciles at the current step.
  // Re-applying an identical spec does nothing. Throws ImageNotFound,
  // InvalidSpec.
  std::vector<Transition> apply_deployment(const DeploymentSpec& spec);
  std::vector<Transition> scale(const std::string& deployment_id,
                                int replicas);
  // Changes the template image without waiting for the rollout.
  std::vector<Transition> set_image(const std::string& deployment_id,
                                    const std::string& image_id);

  // Throws InvalidSpec on a selector/endpoint clash or a reused id.
  void create_service(const ServiceSpec& spec);
  // Back end for services with an external endpoint.
  void register_endpoint(const std::string& address, api::ApiHandler handler);

  std::vector<Transition> advance(std::int64_t steps);
  // Throws UnknownPod.
  std::vector<Transition> kill_pod(const std::string& pod_id);
  // Throws ImageNotFound, UnknownDeployment, UpdateStalled.
  UpdateReport rolling_update(const std::string& deployment_id,
                              const std::string& image_id,
                              const UpdateOptions& options = {});
  // Steps until every deployment is converged. Throws UpdateStalled.
  std::int64_t settle(std::int64_t max_steps = 100);

  // Address of the selected pod, or the external endpoint. Throws
  // UnknownService, ServiceUnavailable.
  std::string route(const std::string& service_id) const;
  // Routes and dispatches in process. Safe to call concurrently with the
  // driver; the response's source starts with "service:" and "pod:".
  api::ApiResponse call(const std::string& service_id,
                        const api::ApiRequest& request) const;

  std::int64_t step() const;
  std::vector<PodInfo> pods(const std::string& deployment_id = "") const;
  int ready_count(const std::string& deployment_id) const;
  bool converged(const std::string& deployment_id) const;
  DeploymentSpec deployment(const std::string& deployment_id) const;
  std::vector<std::string> deployment_ids() const;
  ServiceSpec service(const std::string& service_id) const;
  std::vector<std::string> service_ids() const;
  std::vector<Transition> trace() const;

 private:
  struct Pod;
  struct Deployment;

  void record(std::vector<Transition>& out, std::string entity,
              std::string transition);
  std::vector<Transition> tick();
  void reconcile(Deployment& dep, std::vector<Transition>& out);
  void create_pod(Deployment& dep, std::vector<Transition>& out);
  void terminate_pod(Pod& pod, std::vector<Transition>& out);
  std::string next_pod_id(const std::string& deployment_id);
  std::string next_address();
  std::vector<std::shared_ptr<Pod>> live_pods(const std::string& dep) const;
  bool converged_locked(const Deployment& dep) const;
  int ready_locked(const std::string& dep) const;
  std::shared_ptr<Pod> select_locked(const std::string& service_id,
                                     std::string* external) const;

  ClusterOptions options_;
  mutable std::shared_mutex mu_;
  std::mt19937_64 rng_;
  std::int64_t step_ = 0;
  std::uint64_t address_counter_ = 0;
  std::set<std::string> used_pod_ids_;
  std::map<std::string, std::shared_ptr<const ShardImage>> images_;
  std::set<std::string> faulted_;
  std::map<std::string, std::unique_ptr<Deployment>> deployments_;
  std::map<std::string, ServiceSpec> services_;
  std::map<std::string, std::shared_ptr<Pod>> pods_;  // by pod_id
  std::map<std::string, api::ApiHandler> endpoints_;
  mutable std::map<std::string, std::unique_ptr<std::atomic<std::uint64_t>>>
      rr_counters_;
  std::vector<Transition> trace_;
};

// Scenario files drive a cluster from text:
//
//   seed 7
//   readiness_delay 2
//   image shards/leaf-4.img
//   deployment leaf-4 image=leaf-4@v1 replicas=3 max_unavailable=1 max_surge=1
//   service leaf-4 selector=app:leaf-4 policy=round_robin
//   at 5 kill leaf-4#0
//   at 8 update leaf-4 leaf-4@v2
//   at 9 scale leaf-4 5
//   run 20
//
// "#i" picks the i-th live pod of the deployment in pod_id order. Relative
// image paths resolve against `base_dir`. Returns the full trace.
std::vector<Transition> run_scenario(std::string_view text,
                                     const std::filesystem::path& base_dir);

}  // namespace fdbs::sim
