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

#include "fdbs/clustersim.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>

#include "fdbs/text.hpp"

namespace fdbs::sim {

std::string_view phase_name(Phase phase) noexcept {
  switch (phase) {
    case Phase::Pending: return "Pending";
    case Phase::Ready: return "Ready";
    case Phase::Terminating: return "Terminating";
    case Phase::Gone: return "Gone";
  }
  return "Unknown";
}

std::string_view policy_name(Policy policy) noexcept {
  return policy == Policy::RoundRobin ? "round_robin" : "least_outstanding";
}

Policy parse_policy(std::string_view text) {
  if (text == "round_robin") return Policy::RoundRobin;
  if (text == "least_outstanding") return Policy::LeastOutstanding;
  throw Error(Errc::InvalidSpec, "unknown policy '" + std::string(text) + "'");
}

std::size_t least_outstanding(std::span<const std::int64_t> in_flight) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < in_flight.size(); ++i) {
    if (in_flight[i] < in_flight[best]) best = i;
  }
  return best;
}

std::string Transition::line() const {
  return std::to_string(step) + '\t' + entity + '\t' + transition;
}

std::string trace_text(const std::vector<Transition>& trace) {
  std::string out;
  for (const auto& t : trace) {
    out += t.line();
    out += '\n';
  }
  return out;
}

struct Cluster::Pod {
  PodInfo info;
  std::int64_t ready_at = 0;
  std::atomic<std::int64_t> in_flight{0};
  std::unique_ptr<api::ShardApi> api;
};

struct Cluster::Deployment {
  DeploymentSpec spec;
};

namespace {

void validate(const DeploymentSpec& spec) {
  if (spec.deployment_id.empty()) {
    throw Error(Errc::InvalidSpec, "deployment needs an id");
  }
  if (spec.replicas < 1) {
    throw Error(Errc::InvalidSpec,
                "deployment " + spec.deployment_id + ": replicas must be >= 1");
  }
  if (spec.max_unavailable < 0 || spec.max_surge < 0 ||
      spec.max_unavailable + spec.max_surge < 1) {
    throw Error(Errc::InvalidSpec,
                "deployment " + spec.deployment_id +
                    ": need max_unavailable + max_surge >= 1");
  }
}

bool selects(const Labels& selector, const Labels& labels) {
  for (const auto& [k, v] : selector) {
    auto it = labels.find(k);
    if (it == labels.end() || it->second != v) return false;
  }
  return true;
}

bool is_live(Phase p) { return p == Phase::Pending || p == Phase::Ready; }

}  // namespace

Cluster::Cluster(ClusterOptions options)
    : options_(options), rng_(options.seed) {
  if (options_.readiness_delay < 0) {
    throw Error(Errc::InvalidSpec, "readiness_delay must be >= 0");
  }
}

Cluster::~Cluster() = default;

void Cluster::register_image(std::shared_ptr<const ShardImage> image) {
  std::unique_lock lock(mu_);
  images_[image->reference()] = std::move(image);
}

bool Cluster::has_image(const std::string& image_id) const {
  std::shared_lock lock(mu_);
  return images_.contains(image_id);
}

std::shared_ptr<const ShardImage> Cluster::image(
    const std::string& image_id) const {
  std::shared_lock lock(mu_);
  auto it = images_.find(image_id);
  if (it == images_.end()) {
    throw Error(Errc::ImageNotFound, "image " + image_id + " is not registered");
  }
  return it->second;
}

void Cluster::set_image_fault(const std::string& image_id, bool faulted) {
  std::unique_lock lock(mu_);
  if (faulted) {
    faulted_.insert(image_id);
  } else {
    faulted_.erase(image_id);
  }
}

void Cluster::record(std::vector<Transition>& out, std::string entity,
                     std::string transition) {
  Transition t{step_, std::move(entity), std::move(transition)};
  trace_.push_back(t);
  out.push_back(std::move(t));
}

std::string Cluster::next_pod_id(const std::string& deployment_id) {
  static constexpr std::string_view kAlphabet =
      "abcdefghijklmnopqrstuvwxyz0123456789";
  while (true) {
    std::string id = deployment_id + '-';
    for (int i = 0; i < 5; ++i) id += kAlphabet[rng_() % kAlphabet.size()];
    if (used_pod_ids_.insert(id).second) return id;
  }
}

std::string Cluster::next_address() {
  auto n = ++address_counter_;
  return "10." + std::to_string((n >> 16) & 255) + '.' +
         std::to_string((n >> 8) & 255) + '.' + std::to_string(n & 255);
}

std::vector<std::shared_ptr<Cluster::Pod>> Cluster::live_pods(
    const std::string& dep) const {
  std::vector<std::shared_ptr<Pod>> out;
  for (const auto& [id, pod] : pods_) {
    if (pod->info.deployment_id == dep && is_live(pod->info.phase)) {
      out.push_back(pod);
    }
  }
  return out;
}

int Cluster::ready_locked(const std::string& dep) const {
  int n = 0;
  for (const auto& [id, pod] : pods_) {
    if (pod->info.deployment_id == dep && pod->info.phase == Phase::Ready) ++n;
  }
  return n;
}

void Cluster::create_pod(Deployment& dep, std::vector<Transition>& out) {
  auto image = images_.at(dep.spec.image_id);
  auto pod = std::make_shared<Pod>();
  pod->info.pod_id = next_pod_id(dep.spec.deployment_id);
  pod->info.deployment_id = dep.spec.deployment_id;
  pod->info.labels = dep.spec.labels;
  pod->info.image_id = dep.spec.image_id;
  pod->info.image_version = image->version();
  pod->info.address = next_address();
  pod->info.created_step = step_;
  pod->ready_at = step_ + options_.readiness_delay;
  pod->api = std::make_unique<api::ShardApi>(image, false);
  record(out, "pod:" + pod->info.pod_id,
         "Pending image=" + pod->info.image_id +
             " address=" + pod->info.address);
  if (options_.readiness_delay == 0 && !faulted_.contains(pod->info.image_id)) {
    pod->info.phase = Phase::Ready;
    pod->api->set_ready(true);
    record(out, "pod:" + pod->info.pod_id, "Ready");
  }
  pods_[pod->info.pod_id] = std::move(pod);
}

void Cluster::terminate_pod(Pod& pod, std::vector<Transition>& out) {
  pod.info.phase = Phase::Terminating;
  pod.api->set_ready(false);
  record(out, "pod:" + pod.info.pod_id, "Terminating");
}

void Cluster::reconcile(Deployment& dep, std::vector<Transition>& out) {
  const auto& spec = dep.spec;
  auto live = live_pods(spec.deployment_id);
  int new_live = 0;
  int old_live = 0;
  for (const auto& p : live) {
    (p->info.image_id == spec.image_id ? new_live : old_live)++;
  }
  int live_count = new_live + old_live;

  auto scale_up = [&] {
    while (new_live < spec.replicas &&
           (old_live == 0 || live_count < spec.replicas + spec.max_surge)) {
      create_pod(dep, out);
      ++new_live;
      ++live_count;
    }
  };

  if (old_live == 0) {
    scale_up();
    if (new_live > spec.replicas) {
      // Surplus: Pending pods first, then the newest Ready ones.
      std::sort(live.begin(), live.end(), [](const auto& a, const auto& b) {
        bool ap = a->info.phase == Phase::Pending;
        bool bp = b->info.phase == Phase::Pending;
        if (ap != bp) return ap;
        return std::tie(b->info.created_step, b->info.pod_id) <
               std::tie(a->info.created_step, a->info.pod_id);
      });
      for (int i = 0; i < new_live - spec.replicas; ++i) {
        terminate_pod(*live[i], out);
      }
    }
    return;
  }

  scale_up();
  // Retire old pods, Pending ones first, then oldest first, without letting
  // Ready drop below replicas - max_unavailable.
  std::vector<std::shared_ptr<Pod>> old;
  for (const auto& p : live) {
    if (p->info.image_id != spec.image_id) old.push_back(p);
  }
  std::sort(old.begin(), old.end(), [](const auto& a, const auto& b) {
    bool ap = a->info.phase == Phase::Pending;
    bool bp = b->info.phase == Phase::Pending;
    if (ap != bp) return ap;
    return std::tie(a->info.created_step, a->info.pod_id) <
           std::tie(b->info.created_step, b->info.pod_id);
  });
  int ready = ready_locked(spec.deployment_id);
  const int floor = spec.replicas - spec.max_unavailable;
  for (const auto& p : old) {
    if (p->info.phase == Phase::Ready) {
      if (ready - 1 < floor) break;
      --ready;
    }
    terminate_pod(*p, out);
    --old_live;
    --live_count;
  }
  scale_up();
}

std::vector<Transition> Cluster::apply_deployment(const DeploymentSpec& in) {
  validate(in);
  DeploymentSpec spec = in;
  if (spec.labels.empty()) spec.labels = {{"app", spec.deployment_id}};
  std::unique_lock lock(mu_);
  if (!images_.contains(spec.image_id)) {
    throw Error(Errc::ImageNotFound, "image " + spec.image_id +
                                         " is not registered");
  }
  std::vector<Transition> out;
  auto it = deployments_.find(spec.deployment_id);
  if (it != deployments_.end()) {
    if (it->second->spec == spec) return out;
    it->second->spec = spec;
  } else {
    it = deployments_
             .emplace(spec.deployment_id,
                      std::make_unique<Deployment>(Deployment{spec}))
             .first;
  }
  record(out, "deployment:" + spec.deployment_id,
         "applied image=" + spec.image_id +
             " replicas=" + std::to_string(spec.replicas));
  reconcile(*it->second, out);
  return out;
}

std::vector<Transition> Cluster::scale(const std::string& deployment_id,
                                       int replicas) {
  auto spec = deployment(deployment_id);
  spec.replicas = replicas;
  return apply_deployment(spec);
}

std::vector<Transition> Cluster::set_image(const std::string& deployment_id,
                                           const std::string& image_id) {
  auto spec = deployment(deployment_id);
  spec.image_id = image_id;
  return apply_deployment(spec);
}

void Cluster::create_service(const ServiceSpec& spec) {
  if (spec.service_id.empty()) {
    throw Error(Errc::InvalidSpec, "service needs an id");
  }
  if (spec.external_endpoint && !spec.selector.empty()) {
    throw Error(Errc::InvalidSpec,
                "service " + spec.service_id +
                    ": selector and external endpoint are exclusive");
  }
  if (!spec.external_endpoint && spec.selector.empty()) {
    throw Error(Errc::InvalidSpec,
                "service " + spec.service_id + " selects nothing");
  }
  std::unique_lock lock(mu_);
  if (services_.contains(spec.service_id)) {
    throw Error(Errc::InvalidSpec,
                "service " + spec.service_id + " already exists");
  }
  services_[spec.service_id] = spec;
  rr_counters_[spec.service_id] =
      std::make_unique<std::atomic<std::uint64_t>>(0);
}

void Cluster::register_endpoint(const std::string& address,
                                api::ApiHandler handler) {
  std::unique_lock lock(mu_);
  endpoints_[address] = std::move(handler);
}

std::vector<Transition> Cluster::tick() {
  std::vector<Transition> out;
  ++step_;
  for (auto it = pods_.begin(); it != pods_.end();) {
    if (it->second->info.phase == Phase::Terminating) {
      it->second->info.phase = Phase::Gone;
      record(out, "pod:" + it->first, "Gone");
      it = pods_.erase(it);
    } else {
      ++it;
    }
  }
  for (auto& [id, pod] : pods_) {
    if (pod->info.phase == Phase::Pending && pod->ready_at <= step_ &&
        !faulted_.contains(pod->info.image_id)) {
      pod->info.phase = Phase::Ready;
      pod->api->set_ready(true);
      record(out, "pod:" + id, "Ready");
    }
  }
  for (auto& [id, dep] : deployments_) reconcile(*dep, out);
  return out;
}

std::vector<Transition> Cluster::advance(std::int64_t steps) {
  std::unique_lock lock(mu_);
  std::vector<Transition> out;
  for (std::int64_t i = 0; i < steps; ++i) {
    auto t = tick();
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

std::vector<Transition> Cluster::kill_pod(const std::string& pod_id) {
  std::unique_lock lock(mu_);
  auto it = pods_.find(pod_id);
  if (it == pods_.end()) {
    throw Error(Errc::UnknownPod, "no pod " + pod_id);
  }
  std::vector<Transition> out;
  it->second->info.phase = Phase::Gone;
  it->second->api->set_ready(false);
  record(out, "pod:" + pod_id, "Gone killed");
  pods_.erase(it);
  return out;
}

bool Cluster::converged_locked(const Deployment& dep) const {
  auto live = live_pods(dep.spec.deployment_id);
  if (static_cast<int>(live.size()) != dep.spec.replicas) return false;
  for (const auto& p : live) {
    if (p->info.image_id != dep.spec.image_id ||
        p->info.phase != Phase::Ready) {
      return false;
    }
  }
  for (const auto& [id, p] : pods_) {
    if (p->info.deployment_id == dep.spec.deployment_id &&
        p->info.phase == Phase::Terminating) {
      return false;
    }
  }
  return true;
}

bool Cluster::converged(const std::string& deployment_id) const {
  std::shared_lock lock(mu_);
  auto it = deployments_.find(deployment_id);
  if (it == deployments_.end()) {
    throw Error(Errc::UnknownDeployment, "no deployment " + deployment_id);
  }
  return converged_locked(*it->second);
}

UpdateReport Cluster::rolling_update(const std::string& deployment_id,
                                     const std::string& image_id,
                                     const UpdateOptions& options) {
  UpdateReport report;
  auto spec = deployment(deployment_id);
  if (!has_image(image_id)) {
    throw Error(Errc::ImageNotFound, "image " + image_id +
                                         " is not registered");
  }
  if (spec.image_id == image_id) {
    report.no_op = true;
    report.min_ready = ready_count(deployment_id);
    return report;
  }
  std::size_t start;
  {
    std::shared_lock lock(mu_);
    start = trace_.size();
  }
  set_image(deployment_id, image_id);
  report.min_ready = ready_count(deployment_id);
  while (!converged(deployment_id)) {
    if (report.steps >= options.max_steps) {
      throw Error(Errc::UpdateStalled,
                  "update of " + deployment_id + " to " + image_id +
                      " did not converge within " +
                      std::to_string(options.max_steps) + " steps");
    }
    advance(1);
    ++report.steps;
    report.min_ready = std::min(report.min_ready, ready_count(deployment_id));
    if (options.on_step) options.on_step(step());
  }
  std::shared_lock lock(mu_);
  const std::string pod_prefix = "pod:" + deployment_id + '-';
  for (std::size_t i = start; i < trace_.size(); ++i) {
    const auto& t = trace_[i];
    if (t.entity.starts_with(pod_prefix)) {
      if (t.transition.starts_with("Pending")) ++report.created;
      if (t.transition == "Terminating") ++report.terminated;
    }
    report.trace.push_back(t);
  }
  return report;
}

std::int64_t Cluster::settle(std::int64_t max_steps) {
  std::int64_t steps = 0;
  while (true) {
    bool done = true;
    {
      std::shared_lock lock(mu_);
      for (const auto& [id, dep] : deployments_) {
        done = done && converged_locked(*dep);
      }
    }
    if (done) return steps;
    if (steps >= max_steps) {
      throw Error(Errc::UpdateStalled, "cluster did not settle within " +
                                           std::to_string(max_steps) +
                                           " steps");
    }
    advance(1);
    ++steps;
  }
}

std::shared_ptr<Cluster::Pod> Cluster::select_locked(
    const std::string& service_id, std::string* external) const {
  auto it = services_.find(service_id);
  if (it == services_.end()) {
    throw Error(Errc::UnknownService, "no service " + service_id);
  }
  const auto& svc = it->second;
  if (svc.external_endpoint) {
    *external = *svc.external_endpoint;
    return nullptr;
  }
  std::vector<std::shared_ptr<Pod>> ready;
  for (const auto& [id, pod] : pods_) {
    if (pod->info.phase == Phase::Ready && selects(svc.selector, pod->info.labels)) {
      ready.push_back(pod);
    }
  }
  if (ready.empty()) {
    throw Error(Errc::ServiceUnavailable,
                "service " + service_id + " has no Ready pod");
  }
  if (svc.policy == Policy::RoundRobin) {
    auto n = rr_counters_.at(service_id)->fetch_add(1);
    return ready[n % ready.size()];
  }
  std::vector<std::int64_t> in_flight;
  for (const auto& p : ready) in_flight.push_back(p->in_flight.load());
  return ready[least_outstanding(in_flight)];
}

std::string Cluster::route(const std::string& service_id) const {
  std::shared_lock lock(mu_);
  std::string external;
  auto pod = select_locked(service_id, &external);
  return pod ? pod->info.address : external;
}

api::ApiResponse Cluster::call(const std::string& service_id,
                               const api::ApiRequest& request) const {
  std::shared_ptr<Pod> pod;
  api::ApiHandler handler;
  std::string external;
  {
    std::shared_lock lock(mu_);
    pod = select_locked(service_id, &external);
    if (!pod) {
      auto it = endpoints_.find(external);
      if (it == endpoints_.end()) {
        throw Error(Errc::ServiceUnavailable,
                    "service " + service_id + ": endpoint " + external +
                        " is not reachable");
      }
      handler = it->second;
    }
    if (pod) pod->in_flight.fetch_add(1);
  }
  api::ApiResponse response;
  std::vector<std::string> head{"service:" + service_id};
  if (pod) {
    struct Release {
      Pod& p;
      ~Release() { p.in_flight.fetch_sub(1); }
    } release{*pod};
    response = pod->api->handle(request);
    head.push_back("pod:" + pod->info.pod_id);
  } else {
    response = handler(request);
    head.push_back("endpoint:" + external);
  }
  response.source.insert(response.source.begin(), head.begin(), head.end());
  return response;
}

std::int64_t Cluster::step() const {
  std::shared_lock lock(mu_);
  return step_;
}

std::vector<PodInfo> Cluster::pods(const std::string& deployment_id) const {
  std::shared_lock lock(mu_);
  std::vector<PodInfo> out;
  for (const auto& [id, pod] : pods_) {
    if (!deployment_id.empty() && pod->info.deployment_id != deployment_id) {
      continue;
    }
    PodInfo info = pod->info;
    info.in_flight = pod->in_flight.load();
    out.push_back(std::move(info));
  }
  return out;
}

int Cluster::ready_count(const std::string& deployment_id) const {
  std::shared_lock lock(mu_);
  return ready_locked(deployment_id);
}

DeploymentSpec Cluster::deployment(const std::string& deployment_id) const {
  std::shared_lock lock(mu_);
  auto it = deployments_.find(deployment_id);
  if (it == deployments_.end()) {
    throw Error(Errc::UnknownDeployment, "no deployment " + deployment_id);
  }
  return it->second->spec;
}

std::vector<std::string> Cluster::deployment_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, dep] : deployments_) out.push_back(id);
  return out;
}

ServiceSpec Cluster::service(const std::string& service_id) const {
  std::shared_lock lock(mu_);
  auto it = services_.find(service_id);
  if (it == services_.end()) {
    throw Error(Errc::UnknownService, "no service " + service_id);
  }
  return it->second;
}

std::vector<std::string> Cluster::service_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, svc] : services_) out.push_back(id);
  return out;
}

std::vector<Transition> Cluster::trace() const {
  std::shared_lock lock(mu_);
  return trace_;
}

// --- scenarios --------------------------------------------------------------

namespace {

[[noreturn]] void scenario_error(std::size_t line_no, const std::string& msg) {
  throw Error(Errc::InvalidSpec,
              "scenario line " + std::to_string(line_no) + ": " + msg);
}

std::int64_t scenario_int(std::size_t line_no, std::string_view text) {
  std::int64_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    scenario_error(line_no, "expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::pair<std::string, std::string> key_value(std::size_t line_no,
                                              std::string_view word,
                                              char sep) {
  auto pos = word.find(sep);
  if (pos == std::string_view::npos) {
    scenario_error(line_no, "expected key" + std::string(1, sep) +
                                "value, got '" + std::string(word) + "'");
  }
  return {std::string(word.substr(0, pos)), std::string(word.substr(pos + 1))};
}

Labels parse_labels(std::size_t line_no, std::string_view text) {
  Labels out;
  for (auto part : split(text, ',')) {
    auto [k, v] = key_value(line_no, part, ':');
    out[k] = v;
  }
  return out;
}

struct Event {
  std::size_t line_no;
  std::vector<std::string> words;
};

}  // namespace

std::vector<Transition> run_scenario(std::string_view text,
                                     const std::filesystem::path& base_dir) {
  ClusterOptions options;
  std::unique_ptr<Cluster> cluster;
  auto need = [&]() -> Cluster& {
    if (!cluster) cluster = std::make_unique<Cluster>(options);
    return *cluster;
  };
  std::multimap<std::int64_t, Event> events;

  auto fire = [&](const Event& ev) {
    const auto& w = ev.words;
    auto& c = need();
    if (w[0] == "kill" && w.size() == 2) {
      auto hash = w[1].find('#');
      if (hash == std::string::npos) {
        c.kill_pod(w[1]);
        return;
      }
      auto dep = w[1].substr(0, hash);
      auto index = scenario_int(ev.line_no, std::string_view(w[1]).substr(hash + 1));
      std::vector<PodInfo> live;
      for (auto& p : c.pods(dep)) {
        if (is_live(p.phase)) live.push_back(p);
      }
      if (index < 0 || index >= static_cast<std::int64_t>(live.size())) {
        scenario_error(ev.line_no, "no live pod " + w[1]);
      }
      c.kill_pod(live[index].pod_id);
    } else if (w[0] == "update" && w.size() == 3) {
      c.set_image(w[1], w[2]);
    } else if (w[0] == "scale" && w.size() == 3) {
      c.scale(w[1], static_cast<int>(scenario_int(ev.line_no, w[2])));
    } else {
      scenario_error(ev.line_no, "unknown event '" + w[0] + "'");
    }
  };

  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto w = words(line);
    const auto cmd = w[0];
    if (cmd == "seed" && w.size() == 2) {
      if (cluster) scenario_error(line_no, "seed must come first");
      options.seed = static_cast<std::uint64_t>(scenario_int(line_no, w[1]));
    } else if (cmd == "readiness_delay" && w.size() == 2) {
      if (cluster) scenario_error(line_no, "readiness_delay must come first");
      options.readiness_delay = static_cast<int>(scenario_int(line_no, w[1]));
    } else if (cmd == "image" && w.size() == 2) {
      auto path = base_dir / std::string(w[1]);
      std::ifstream in(path, std::ios::binary);
      if (!in) {
        throw Error(Errc::IoError, "cannot read image " + path.string());
      }
      std::stringstream buf;
      buf << in.rdbuf();
      need().register_image(
          std::make_shared<const ShardImage>(load_image(buf.str())));
    } else if (cmd == "deployment" && w.size() >= 2) {
      DeploymentSpec spec;
      spec.deployment_id = std::string(w[1]);
      for (std::size_t i = 2; i < w.size(); ++i) {
        auto [k, v] = key_value(line_no, w[i], '=');
        if (k == "image") {
          spec.image_id = v;
        } else if (k == "replicas") {
          spec.replicas = static_cast<int>(scenario_int(line_no, v));
        } else if (k == "max_unavailable") {
          spec.max_unavailable = static_cast<int>(scenario_int(line_no, v));
        } else if (k == "max_surge") {
          spec.max_surge = static_cast<int>(scenario_int(line_no, v));
        } else if (k == "label") {
          auto [lk, lv] = key_value(line_no, v, ':');
          spec.labels[lk] = lv;
        } else {
          scenario_error(line_no, "unknown deployment field '" + k + "'");
        }
      }
      need().apply_deployment(spec);
    } else if (cmd == "service" && w.size() >= 2) {
      ServiceSpec spec;
      spec.service_id = std::string(w[1]);
      for (std::size_t i = 2; i < w.size(); ++i) {
        auto [k, v] = key_value(line_no, w[i], '=');
        if (k == "selector") {
          spec.selector = parse_labels(line_no, v);
        } else if (k == "policy") {
          spec.policy = parse_policy(v);
        } else if (k == "external") {
          spec.external_endpoint = v;
        } else {
          scenario_error(line_no, "unknown service field '" + k + "'");
        }
      }
      need().create_service(spec);
    } else if (cmd == "at" && w.size() >= 3) {
      Event ev{line_no, {}};
      for (std::size_t i = 2; i < w.size(); ++i) ev.words.emplace_back(w[i]);
      events.emplace(scenario_int(line_no, w[1]), std::move(ev));
    } else if (cmd == "run" && w.size() == 2) {
      auto& c = need();
      auto n = scenario_int(line_no, w[1]);
      for (std::int64_t i = 0; i < n; ++i) {
        auto [lo, hi] = events.equal_range(c.step());
        for (auto it = lo; it != hi; ++it) fire(it->second);
        events.erase(lo, hi);
        c.advance(1);
      }
    } else {
      scenario_error(line_no, "cannot parse '" + std::string(line) + "'");
    }
  }
  return cluster ? cluster->trace() : std::vector<Transition>{};
}

}  // namespace fdbs::sim
