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

#include "fdbs/federation_api.hpp"

#include <charconv>

namespace fdbs::api {

namespace {

const std::string& param(const ApiRequest& r, const std::string& name) {
  auto it = r.params.find(name);
  if (it == r.params.end() || it->second.empty()) {
    throw Error(Errc::BadRequest, "missing parameter '" + name + "'");
  }
  return it->second;
}

int int_param(const ApiRequest& r, const std::string& name, int fallback) {
  auto it = r.params.find(name);
  if (it == r.params.end()) return fallback;
  int v = 0;
  const auto& s = it->second;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    throw Error(Errc::BadRequest, "invalid parameter '" + name + "': not an integer");
  }
  return v;
}

Json transitions_json(const std::vector<sim::Transition>& ts) {
  Json out = Json::array();
  for (const auto& t : ts) out.push_back(t.line());
  return out;
}

ApiResponse ok_status() {
  ApiResponse r;
  r.body = Json{{"status", "ok"}};
  return r;
}

}  // namespace

Json catalog_json(const std::vector<catalog::CatalogEntry>& entries) {
  Json list = Json::array();
  for (const auto& e : entries) {
    Json caps = Json::array();
    for (auto c : e.capabilities) caps.push_back(catalog::capability_name(c));
    list.push_back(Json{{"capabilities", std::move(caps)},
                        {"coverage", e.coverage.expression()},
                        {"kind", catalog::kind_name(e.kind)},
                        {"name", e.name},
                        {"registered_at", e.registered_at},
                        {"service_id", e.service_id}});
  }
  return Json{{"entries", std::move(list)}};
}

FederationApi::FederationApi(const engine::Engine& engine,
                             catalog::Catalog& catalog, sim::Cluster* cluster)
    : engine_(engine), catalog_(catalog), cluster_(cluster) {}

ApiResponse FederationApi::handle(const ApiRequest& request) const {
  if (request.path == "/healthz" || request.path == "/readyz") {
    return ok_status();
  }
  if (request.path == "/catalog") {
    ApiResponse r;
    r.body = catalog_json(catalog_.snapshot());
    r.source.push_back("engine:" + engine_.options().name);
    return r;
  }
  if (request.path.starts_with("/admin/")) {
    try {
      return admin(request);
    } catch (const Error& e) {
      return error_response(e);
    }
  }
  if (auto r = handle_read(engine_, request)) return *r;
  return error_response(404, "NotFound", "no route for " + request.path);
}

ApiResponse FederationApi::admin(const ApiRequest& request) const {
  const auto& path = request.path;
  if (!cluster_ || (path != "/admin/deploy" && path != "/admin/update" &&
                    path != "/admin/kill-pod")) {
    return error_response(404, "NotFound", "no route for " + path);
  }
  if (request.method != "POST") {
    throw Error(Errc::BadRequest, path + " requires POST");
  }
  std::lock_guard lock(admin_mu_);
  ApiResponse r;
  if (path == "/admin/kill-pod") {
    r.body = Json{{"transitions", transitions_json(cluster_->kill_pod(param(request, "pod")))}};
    return r;
  }
  const auto& dep = param(request, "deployment");
  const auto& image = param(request, "image");
  if (path == "/admin/update") {
    sim::UpdateOptions opts;
    opts.max_steps = int_param(request, "max_steps", 100);
    auto report = cluster_->rolling_update(dep, image, opts);
    r.body = Json{{"created", report.created},
                  {"min_ready", report.min_ready},
                  {"no_op", report.no_op},
                  {"steps", report.steps},
                  {"terminated", report.terminated},
                  {"transitions", transitions_json(report.trace)}};
    return r;
  }
  sim::DeploymentSpec spec;
  spec.deployment_id = dep;
  spec.image_id = image;
  spec.replicas = int_param(request, "replicas", 1);
  spec.max_unavailable = int_param(request, "max_unavailable", 1);
  spec.max_surge = int_param(request, "max_surge", 1);
  auto transitions = cluster_->apply_deployment(spec);
  bool have_service = false;
  for (const auto& id : cluster_->service_ids()) have_service |= id == dep;
  if (!have_service) {
    cluster_->create_service({dep, {{"app", dep}}, sim::Policy::RoundRobin, {}});
  }
  catalog::CatalogEntry entry;
  entry.name = dep;
  entry.service_id = dep;
  entry.coverage = cluster_->image(image)->coverage();
  catalog_.register_entry(entry);
  r.body = Json{{"transitions", transitions_json(transitions)}};
  return r;
}

}  // namespace fdbs::api
