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

// Geospatial record model, partitioning, and the immutable shard image.
//
// A shard image is the unit of deployment: a sorted, checksummed, versioned
// set of records together with a coverage description saying which records
// it may hold. Images are built once and never modified; a new version is a
// new image.
//
// Image file layout (line oriented, '\n' terminated):
//
//   FDBSIMG 1
//   id <text>
//   version <int>
//   coverage <canonical coverage expression>
//   count <int>
//   sha256 <64 lowercase hex>
//   ---
//   postcode\ttheme\tlon\tlat\tpayload      (count lines, canonical order)
//
// The digest covers exactly the bytes following "---\n".

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace fdbs {

struct BuildOptions;

// Coordinates are stored with exactly six fractional digits. Micro-degrees
// are the exact integer form of that representation.
using MicroDegrees = std::int64_t;

MicroDegrees to_micro(double degrees);
double from_micro(MicroDegrees micro);
// Fixed 6-decimal text, e.g. "-84.500000".
std::string format_fixed6(double degrees);
std::string format_micro(MicroDegrees micro);
// Parses decimal text with at most six fractional digits exactly.
std::optional<MicroDegrees> parse_micro(std::string_view text);

struct GeoRecord {
  std::string postcode;
  double lon = 0.0;
  double lat = 0.0;
  std::string theme;
  std::string payload;

  bool operator==(const GeoRecord&) const = default;
};

// Canonical order: (postcode, theme, lon, lat).
bool canonical_less(const GeoRecord& a, const GeoRecord& b);
bool same_key(const GeoRecord& a, const GeoRecord& b);

bool is_valid_postcode(std::string_view text);
bool is_valid_prefix(std::string_view text);
bool is_valid_theme(std::string_view text);
// Throws Error(InvalidRecord) naming the violated field.
void validate_record(const GeoRecord& record);
// Snaps coordinates to the six-decimal grid used by the image format.
GeoRecord canonicalize(GeoRecord record);

struct BBox {
  double lon_min = -180.0;
  double lon_max = 180.0;
  double lat_min = -90.0;
  double lat_max = 90.0;

  // Half-open on both axes, except that lat_max == 90 is closed.
  bool contains(double lon, double lat) const;
  bool operator==(const BBox&) const = default;
};

struct QueryPredicate {
  std::optional<std::string> prefix;
  std::optional<BBox> bbox;
  std::optional<std::string> theme;
  bool match_all = false;

  static QueryPredicate all() {
    QueryPredicate p;
    p.match_all = true;
    return p;
  }

  bool empty_filter() const { return !prefix && !bbox && !theme; }
  bool matches(const GeoRecord& record) const;
  // Throws Error(InvalidPredicate).
  void validate() const;

  bool operator==(const QueryPredicate&) const = default;
};

struct Cuboid {
  double lon_min = 0.0;
  double lon_max = 0.0;
  double lat_min = 0.0;
  double lat_max = 0.0;
  std::string theme;

  bool contains(const GeoRecord& record) const;
  bool contains_point(double lon, double lat) const;
  bool intersects(const BBox& box) const;
  bool overlaps(const Cuboid& other) const;

  auto operator<=>(const Cuboid& other) const {
    return std::tie(theme, lon_min, lat_min, lon_max, lat_max) <=>
           std::tie(other.theme, other.lon_min, other.lat_min, other.lon_max,
                    other.lat_max);
  }
  bool operator==(const Cuboid&) const = default;
};

enum class CoverageKind { Prefix, Cuboid, Union };

// Describes which records a shard (or a federation) may hold.
class Coverage {
 public:
  static Coverage of_prefixes(std::vector<std::string> prefixes);
  static Coverage of_cuboids(std::vector<Cuboid> cuboids);
  static Coverage union_of(std::vector<Coverage> parts);

  CoverageKind kind() const { return kind_; }
  const std::vector<std::string>& prefixes() const { return prefixes_; }
  const std::vector<Cuboid>& cuboids() const { return cuboids_; }
  const std::vector<Coverage>& parts() const { return parts_; }

  bool contains(const GeoRecord& record) const;
  // False only when no record matching `pred` can lie inside this coverage.
  bool intersects(const QueryPredicate& pred) const;

  std::string expression() const;

  bool operator==(const Coverage& other) const {
    return expression() == other.expression();
  }

 private:
  CoverageKind kind_ = CoverageKind::Prefix;
  std::vector<std::string> prefixes_;
  std::vector<Cuboid> cuboids_;
  std::vector<Coverage> parts_;
};

// Throws Error(InvalidCoverage).
Coverage parse_coverage(std::string_view expression);

class ShardImage {
 public:
  const std::string& id() const { return id_; }
  std::int64_t version() const { return version_; }
  const Coverage& coverage() const { return coverage_; }
  std::size_t record_count() const { return records_.size(); }
  const std::string& checksum() const { return checksum_; }
  std::span<const GeoRecord> records() const { return records_; }

  // "<id>@v<version>", the identity the cluster deploys by.
  std::string reference() const;

 private:
  friend ShardImage build_image(std::string, std::vector<GeoRecord>,
                                Coverage, std::int64_t,
                                const BuildOptions&);
  friend ShardImage load_image(std::string_view bytes);

  std::string id_;
  std::int64_t version_ = 1;
  Coverage coverage_;
  std::vector<GeoRecord> records_;
  std::string checksum_;
};

struct BuildOptions {
  std::size_t soft_cap = 100'000;
  // Receives the oversize warning; defaults to stderr when empty.
  std::function<void(std::string_view)> warn;
};

// Throws CoverageViolation, DuplicateRecord, InvalidRecord.
ShardImage build_image(std::string id, std::vector<GeoRecord> records,
                       Coverage coverage, std::int64_t version,
                       const BuildOptions& options = {});

std::string serialize_image(const ShardImage& image);
// Throws FormatError, ChecksumMismatch, InvariantViolation.
ShardImage load_image(std::string_view bytes);

std::string record_line(const GeoRecord& record);
// Throws FormatError.
GeoRecord parse_record_line(std::string_view line);

struct ScanRange {
  std::size_t offset = 0;
  std::size_t limit = std::numeric_limits<std::size_t>::max();
};

std::vector<GeoRecord> scan(const ShardImage& image,
                            const QueryPredicate& pred, ScanRange range = {});
std::size_t count(const ShardImage& image, const QueryPredicate& pred);

// Throws InvalidPrefixLen.
std::map<std::string, std::vector<GeoRecord>> partition_by_prefix(
    std::span<const GeoRecord> records, int prefix_len);

// Cells are [lon0 + i*cell, lon0 + (i+1)*cell) x [lat0 + j*cell, ...),
// clipped to the valid coordinate ranges.
std::map<Cuboid, std::vector<GeoRecord>> partition_by_cuboid(
    std::span<const GeoRecord> records, double cell_deg, double lon0,
    double lat0);

// Dataset files: "# fdbs dataset 1" followed by record lines.
std::string write_dataset(std::span<const GeoRecord> records);
std::vector<GeoRecord> read_dataset(std::string_view text);

// Deterministic synthetic postcode-style records; every record passes
// validate_record and full keys are unique.
std::vector<GeoRecord> generate_records(std::size_t count, std::uint64_t seed,
                                        std::span<const std::string> themes);

std::string sha256_hex(std::string_view bytes);

}  // namespace fdbs
