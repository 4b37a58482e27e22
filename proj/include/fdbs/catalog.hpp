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

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fdbs/geostore.hpp"

namespace fdbs::catalog {

enum class Kind { Leaf, Federation };
enum class Capability { Records, Count, Groups };

std::string_view kind_name(Kind kind) noexcept;
std::string_view capability_name(Capability cap) noexcept;

inline const std::set<Capability> kAllCapabilities{
    Capability::Records, Capability::Count, Capability::Groups};

struct CatalogEntry {
  std::string name;
  std::string service_id;
  Kind kind = Kind::Leaf;
  Coverage coverage;
  std::set<Capability> capabilities = kAllCapabilities;
  std::int64_t registered_at = 0;  // assigned by register_entry

  // Equality ignores registered_at: it is what re-registration compares.
  bool same_as(const CatalogEntry& other) const;
};

class Catalog {
 public:
  // Optional check that a service_id exists, run at registration.
  using ServiceCheck = std::function<bool(const std::string&)>;

  Catalog() = default;
  explicit Catalog(ServiceCheck check) : check_(std::move(check)) {}

  // Idempotent for an identical entry. Throws NameConflict, InvalidSpec.
  CatalogEntry register_entry(CatalogEntry entry);
  // Entries whose coverage intersects pred, sorted by name.
  std::vector<CatalogEntry> resolve(const QueryPredicate& pred) const;
  std::vector<CatalogEntry> snapshot() const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, CatalogEntry> entries_;
  std::int64_t clock_ = 0;
  ServiceCheck check_;
};

// "# fdbs catalog 1" then name<TAB>service_id<TAB>kind<TAB>caps<TAB>coverage.
std::string export_text(const std::vector<CatalogEntry>& entries);
// Throws FormatError, InvalidCoverage.
std::vector<CatalogEntry> import_text(std::string_view text);

}  // namespace fdbs::catalog
