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

#include "fdbs/catalog.hpp"

#include <mutex>

#include "fdbs/error.hpp"
#include "fdbs/text.hpp"

namespace fdbs::catalog {

std::string_view kind_name(Kind kind) noexcept {
  return kind == Kind::Leaf ? "leaf" : "federation";
}

std::string_view capability_name(Capability cap) noexcept {
  switch (cap) {
    case Capability::Records: return "records";
    case Capability::Count: return "count";
    case Capability::Groups: return "groups";
  }
  return "unknown";
}

bool CatalogEntry::same_as(const CatalogEntry& other) const {
  return name == other.name && service_id == other.service_id &&
         kind == other.kind && coverage == other.coverage &&
         capabilities == other.capabilities;
}

CatalogEntry Catalog::register_entry(CatalogEntry entry) {
  if (entry.name.empty() || entry.service_id.empty()) {
    throw Error(Errc::InvalidSpec, "catalog entry needs a name and a service");
  }
  if (entry.name.find_first_of("\t\n") != std::string::npos ||
      entry.service_id.find_first_of("\t\n") != std::string::npos) {
    throw Error(Errc::InvalidSpec, "catalog names may not contain tabs");
  }
  if (check_ && !check_(entry.service_id)) {
    throw Error(Errc::UnknownService, "catalog entry " + entry.name +
                                          " names unknown service " +
                                          entry.service_id);
  }
  std::unique_lock lock(mu_);
  auto it = entries_.find(entry.name);
  if (it != entries_.end()) {
    if (it->second.same_as(entry)) return it->second;
    throw Error(Errc::NameConflict,
                "catalog already has a different entry named " + entry.name);
  }
  entry.registered_at = ++clock_;
  entries_.emplace(entry.name, entry);
  return entry;
}

std::vector<CatalogEntry> Catalog::resolve(const QueryPredicate& pred) const {
  std::shared_lock lock(mu_);
  std::vector<CatalogEntry> out;
  for (const auto& [name, entry] : entries_) {
    if (entry.coverage.intersects(pred)) out.push_back(entry);
  }
  return out;
}

std::vector<CatalogEntry> Catalog::snapshot() const {
  std::shared_lock lock(mu_);
  std::vector<CatalogEntry> out;
  for (const auto& [name, entry] : entries_) out.push_back(entry);
  return out;
}

std::size_t Catalog::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::string export_text(const std::vector<CatalogEntry>& entries) {
  std::string out = "# fdbs catalog 1\n";
  for (const auto& e : entries) {
    std::vector<std::string> caps;
    for (auto c : e.capabilities) caps.emplace_back(capability_name(c));
    out += e.name + '\t' + e.service_id + '\t' + std::string(kind_name(e.kind)) +
           '\t' + join(caps, ",") + '\t' + e.coverage.expression() + '\n';
  }
  return out;
}

std::vector<CatalogEntry> import_text(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.empty() || lines[0] != "# fdbs catalog 1") {
    throw Error(Errc::FormatError, "not a catalog document");
  }
  std::vector<CatalogEntry> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split(lines[i], '\t');
    if (f.size() != 5) {
      throw Error(Errc::FormatError,
                  "catalog line " + std::to_string(i + 1) + ": need 5 fields");
    }
    CatalogEntry e;
    e.name = std::string(f[0]);
    e.service_id = std::string(f[1]);
    if (f[2] == "leaf") {
      e.kind = Kind::Leaf;
    } else if (f[2] == "federation") {
      e.kind = Kind::Federation;
    } else {
      throw Error(Errc::FormatError, "catalog line " + std::to_string(i + 1) +
                                         ": unknown kind '" + std::string(f[2]) +
                                         "'");
    }
    e.capabilities.clear();
    for (auto c : split(f[3], ',')) {
      if (c == "records") {
        e.capabilities.insert(Capability::Records);
      } else if (c == "count") {
        e.capabilities.insert(Capability::Count);
      } else if (c == "groups") {
        e.capabilities.insert(Capability::Groups);
      } else {
        throw Error(Errc::FormatError,
                    "catalog line " + std::to_string(i + 1) +
                        ": unknown capability '" + std::string(c) + "'");
      }
    }
    e.coverage = parse_coverage(f[4]);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace fdbs::catalog
