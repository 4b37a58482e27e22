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

#include "fdbs/geostore.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <random>
#include <unordered_set>

#include "fdbs/error.hpp"
#include "fdbs/text.hpp"

namespace fdbs {

namespace {

constexpr std::string_view kImageMagic = "FDBSIMG 1";
constexpr std::string_view kDatasetHeader = "# fdbs dataset 1";
constexpr std::string_view kSeparator = "---";

[[noreturn]] void format_error(const std::string& what) {
  throw Error(Errc::FormatError, "shard image: " + what);
}

bool lat_in_interval(double lat, double lo, double hi) {
  return lo <= lat && (lat < hi || (hi == 90.0 && lat == 90.0));
}

bool intervals_overlap(double a_lo, double a_hi, double b_lo, double b_hi) {
  return a_lo < b_hi && b_lo < a_hi;
}

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || end != text.data() + text.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

void validate_cuboid(const Cuboid& c) {
  auto bad = [&](const std::string& why) {
    throw Error(Errc::InvalidCoverage, "cuboid: " + why);
  };
  if (!std::isfinite(c.lon_min) || !std::isfinite(c.lon_max) ||
      !std::isfinite(c.lat_min) || !std::isfinite(c.lat_max)) {
    bad("non-finite bound");
  }
  if (!(c.lon_min < c.lon_max)) bad("lon_min must be < lon_max");
  if (!(c.lat_min < c.lat_max)) bad("lat_min must be < lat_max");
  if (!is_valid_theme(c.theme)) bad("invalid theme '" + c.theme + "'");
}

std::string cuboid_expression(const Cuboid& c) {
  return "theme=" + c.theme + ";lon=" + format_number(c.lon_min) + "," +
         format_number(c.lon_max) + ";lat=" + format_number(c.lat_min) + "," +
         format_number(c.lat_max);
}

std::pair<double, double> parse_pair(std::string_view text) {
  auto fields = split(text, ',');
  if (fields.size() != 2) {
    throw Error(Errc::InvalidCoverage,
                "expected two comma-separated bounds, got '" +
                    std::string(text) + "'");
  }
  auto lo = parse_number(fields[0]);
  auto hi = parse_number(fields[1]);
  if (!lo || !hi) {
    throw Error(Errc::InvalidCoverage,
                "bad numeric bound in '" + std::string(text) + "'");
  }
  return {*lo, *hi};
}

Cuboid parse_cuboid(std::string_view text) {
  auto fields = split(text, ';');
  if (fields.size() != 3 || !fields[0].starts_with("theme=") ||
      !fields[1].starts_with("lon=") || !fields[2].starts_with("lat=")) {
    throw Error(Errc::InvalidCoverage,
                "cuboid must be theme=..;lon=..,..;lat=..,..: '" +
                    std::string(text) + "'");
  }
  Cuboid c;
  c.theme = std::string(fields[0].substr(6));
  std::tie(c.lon_min, c.lon_max) = parse_pair(fields[1].substr(4));
  std::tie(c.lat_min, c.lat_max) = parse_pair(fields[2].substr(4));
  return c;
}

std::string record_section(std::span<const GeoRecord> records) {
  std::string out;
  out.reserve(records.size() * 48);
  for (const auto& r : records) {
    out += record_line(r);
    out += '\n';
  }
  return out;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  std::int64_t value = 0;
  if (text.empty()) return std::nullopt;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

MicroDegrees to_micro(double degrees) {
  return static_cast<MicroDegrees>(std::llround(degrees * 1e6));
}

double from_micro(MicroDegrees micro) {
  return static_cast<double>(micro) / 1e6;
}

std::string format_micro(MicroDegrees micro) {
  std::string out;
  if (micro < 0) out += '-';
  auto magnitude = static_cast<std::uint64_t>(micro < 0 ? -micro : micro);
  out += std::to_string(magnitude / 1'000'000);
  out += '.';
  auto frac = std::to_string(magnitude % 1'000'000);
  out.append(6 - frac.size(), '0');
  out += frac;
  return out;
}

std::string format_fixed6(double degrees) {
  return format_micro(to_micro(degrees));
}

std::optional<MicroDegrees> parse_micro(std::string_view text) {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac =
      dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() || whole.size() > 12 || frac.size() > 6) {
    return std::nullopt;
  }
  if (dot != std::string_view::npos && frac.empty()) return std::nullopt;
  auto all_digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](char ch) { return ch >= '0' && ch <= '9'; });
  };
  if (!all_digits(whole) || !all_digits(frac)) return std::nullopt;
  MicroDegrees value = 0;
  for (char ch : whole) value = value * 10 + (ch - '0');
  MicroDegrees frac_value = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    frac_value = frac_value * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  }
  value = value * 1'000'000 + frac_value;
  return negative ? -value : value;
}

bool canonical_less(const GeoRecord& a, const GeoRecord& b) {
  return std::tie(a.postcode, a.theme, a.lon, a.lat) <
         std::tie(b.postcode, b.theme, b.lon, b.lat);
}

bool same_key(const GeoRecord& a, const GeoRecord& b) {
  return a.postcode == b.postcode && a.theme == b.theme && a.lon == b.lon &&
         a.lat == b.lat;
}

bool is_valid_prefix(std::string_view text) {
  return !text.empty() && text.size() <= 5 &&
         std::all_of(text.begin(), text.end(),
                     [](char ch) { return ch >= '0' && ch <= '9'; });
}

bool is_valid_postcode(std::string_view text) {
  return text.size() == 5 && is_valid_prefix(text);
}

bool is_valid_theme(std::string_view text) {
  static constexpr std::string_view kReserved = ";|=()+,&?#%/\\\"";
  return !text.empty() && std::all_of(text.begin(), text.end(), [](char ch) {
    auto uch = static_cast<unsigned char>(ch);
    return uch > 0x20 && uch != 0x7f &&
           kReserved.find(ch) == std::string_view::npos;
  });
}

void validate_record(const GeoRecord& r) {
  auto bad = [&](const std::string& field, const std::string& why) {
    throw Error(Errc::InvalidRecord, "record " + r.postcode + ": field '" +
                                         field + "' " + why);
  };
  if (!is_valid_postcode(r.postcode)) bad("postcode", "must be five digits");
  if (!std::isfinite(r.lon) || r.lon < -180.0 || r.lon >= 180.0) {
    bad("lon", "must lie in [-180, 180)");
  }
  if (!std::isfinite(r.lat) || r.lat < -90.0 || r.lat > 90.0) {
    bad("lat", "must lie in [-90, 90]");
  }
  if (!is_valid_theme(r.theme)) bad("theme", "must be a non-empty tag");
  if (r.payload.find_first_of("\t\r\n") != std::string::npos) {
    bad("payload", "must not contain tabs or line breaks");
  }
}

GeoRecord canonicalize(GeoRecord record) {
  record.lon = from_micro(to_micro(record.lon));
  record.lat = from_micro(to_micro(record.lat));
  return record;
}

bool BBox::contains(double lon, double lat) const {
  return lon_min <= lon && lon < lon_max &&
         lat_in_interval(lat, lat_min, lat_max);
}

bool QueryPredicate::matches(const GeoRecord& r) const {
  if (prefix && !r.postcode.starts_with(*prefix)) return false;
  if (theme && r.theme != *theme) return false;
  if (bbox && !bbox->contains(r.lon, r.lat)) return false;
  return true;
}

void QueryPredicate::validate() const {
  auto bad = [](const std::string& why) {
    throw Error(Errc::InvalidPredicate, why);
  };
  if (!match_all && empty_filter()) {
    bad("predicate needs a prefix, bbox, theme, or the match-all flag");
  }
  if (prefix && !is_valid_prefix(*prefix)) {
    bad("prefix must be 1-5 digits");
  }
  if (theme && !is_valid_theme(*theme)) bad("theme must be a non-empty tag");
  if (bbox) {
    const auto& b = *bbox;
    if (!(b.lon_min < b.lon_max) || !(b.lat_min < b.lat_max)) {
      bad("bbox requires lonmin < lonmax and latmin < latmax");
    }
    if (b.lon_min < -180.0 || b.lon_max > 180.0 || b.lat_min < -90.0 ||
        b.lat_max > 90.0) {
      bad("bbox exceeds coordinate ranges");
    }
  }
}

bool Cuboid::contains_point(double lon, double lat) const {
  return lon_min <= lon && lon < lon_max &&
         lat_in_interval(lat, lat_min, lat_max);
}

bool Cuboid::contains(const GeoRecord& r) const {
  return r.theme == theme && contains_point(r.lon, r.lat);
}

bool Cuboid::intersects(const BBox& box) const {
  return intervals_overlap(lon_min, lon_max, box.lon_min, box.lon_max) &&
         intervals_overlap(lat_min, lat_max, box.lat_min, box.lat_max);
}

bool Cuboid::overlaps(const Cuboid& o) const {
  return theme == o.theme &&
         intervals_overlap(lon_min, lon_max, o.lon_min, o.lon_max) &&
         intervals_overlap(lat_min, lat_max, o.lat_min, o.lat_max);
}

Coverage Coverage::of_prefixes(std::vector<std::string> prefixes) {
  if (prefixes.empty()) {
    throw Error(Errc::InvalidCoverage, "prefix coverage needs a prefix");
  }
  for (const auto& p : prefixes) {
    if (!is_valid_prefix(p)) {
      throw Error(Errc::InvalidCoverage, "invalid prefix '" + p + "'");
    }
  }
  std::sort(prefixes.begin(), prefixes.end());
  prefixes.erase(std::unique(prefixes.begin(), prefixes.end()),
                 prefixes.end());
  // In a sorted set, a nested pair always shows up between neighbours.
  for (std::size_t i = 1; i < prefixes.size(); ++i) {
    if (prefixes[i].starts_with(prefixes[i - 1])) {
      throw Error(Errc::InvalidCoverage, "prefix '" + prefixes[i] +
                                             "' is nested in '" +
                                             prefixes[i - 1] + "'");
    }
  }
  Coverage c;
  c.kind_ = CoverageKind::Prefix;
  c.prefixes_ = std::move(prefixes);
  return c;
}

Coverage Coverage::of_cuboids(std::vector<Cuboid> cuboids) {
  if (cuboids.empty()) {
    throw Error(Errc::InvalidCoverage, "cuboid coverage needs a cuboid");
  }
  for (const auto& c : cuboids) validate_cuboid(c);
  std::sort(cuboids.begin(), cuboids.end());
  cuboids.erase(std::unique(cuboids.begin(), cuboids.end()), cuboids.end());
  for (std::size_t i = 0; i < cuboids.size(); ++i) {
    for (std::size_t j = i + 1; j < cuboids.size() &&
                                cuboids[j].theme == cuboids[i].theme &&
                                cuboids[j].lon_min < cuboids[i].lon_max;
         ++j) {
      if (cuboids[i].overlaps(cuboids[j])) {
        throw Error(Errc::InvalidCoverage,
                    "cuboids overlap: " + cuboid_expression(cuboids[i]) +
                        " and " + cuboid_expression(cuboids[j]));
      }
    }
  }
  Coverage c;
  c.kind_ = CoverageKind::Cuboid;
  c.cuboids_ = std::move(cuboids);
  return c;
}

Coverage Coverage::union_of(std::vector<Coverage> parts) {
  if (parts.empty()) {
    throw Error(Errc::InvalidCoverage, "union coverage needs a part");
  }
  std::sort(parts.begin(), parts.end(),
            [](const Coverage& a, const Coverage& b) {
              return a.expression() < b.expression();
            });
  parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
  Coverage c;
  c.kind_ = CoverageKind::Union;
  c.parts_ = std::move(parts);
  return c;
}

bool Coverage::contains(const GeoRecord& r) const {
  switch (kind_) {
    case CoverageKind::Prefix:
      return std::any_of(prefixes_.begin(), prefixes_.end(),
                         [&](const auto& p) { return r.postcode.starts_with(p); });
    case CoverageKind::Cuboid:
      return std::any_of(cuboids_.begin(), cuboids_.end(),
                         [&](const auto& c) { return c.contains(r); });
    case CoverageKind::Union:
      return std::any_of(parts_.begin(), parts_.end(),
                         [&](const auto& p) { return p.contains(r); });
  }
  return false;
}

bool Coverage::intersects(const QueryPredicate& pred) const {
  switch (kind_) {
    case CoverageKind::Prefix:
      if (!pred.prefix) return true;
      return std::any_of(prefixes_.begin(), prefixes_.end(),
                         [&](const std::string& p) {
                           return p.starts_with(*pred.prefix) ||
                                  pred.prefix->starts_with(p);
                         });
    case CoverageKind::Cuboid:
      return std::any_of(cuboids_.begin(), cuboids_.end(),
                         [&](const Cuboid& c) {
                           return (!pred.theme || *pred.theme == c.theme) &&
                                  (!pred.bbox || c.intersects(*pred.bbox));
                         });
    case CoverageKind::Union:
      return std::any_of(parts_.begin(), parts_.end(),
                         [&](const auto& p) { return p.intersects(pred); });
  }
  return false;
}

std::string Coverage::expression() const {
  std::string out;
  switch (kind_) {
    case CoverageKind::Prefix:
      out = "prefix:" + join(prefixes_, ",");
      break;
    case CoverageKind::Cuboid: {
      out = "cuboid:";
      for (std::size_t i = 0; i < cuboids_.size(); ++i) {
        if (i) out += '|';
        out += cuboid_expression(cuboids_[i]);
      }
      break;
    }
    case CoverageKind::Union: {
      out = "union:";
      for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (i) out += '+';
        out += '(' + parts_[i].expression() + ')';
      }
      break;
    }
  }
  return out;
}

Coverage parse_coverage(std::string_view expr) {
  if (expr.starts_with("prefix:")) {
    std::vector<std::string> prefixes;
    for (auto p : split(expr.substr(7), ',')) prefixes.emplace_back(p);
    return Coverage::of_prefixes(std::move(prefixes));
  }
  if (expr.starts_with("cuboid:")) {
    std::vector<Cuboid> cuboids;
    for (auto c : split(expr.substr(7), '|')) cuboids.push_back(parse_cuboid(c));
    return Coverage::of_cuboids(std::move(cuboids));
  }
  if (expr.starts_with("union:")) {
    std::string_view rest = expr.substr(6);
    std::vector<Coverage> parts;
    while (true) {
      if (rest.empty() || rest.front() != '(') {
        throw Error(Errc::InvalidCoverage,
                    "union part must be parenthesised: '" + std::string(expr) +
                        "'");
      }
      int depth = 0;
      std::size_t close = std::string_view::npos;
      for (std::size_t i = 0; i < rest.size(); ++i) {
        if (rest[i] == '(') ++depth;
        if (rest[i] == ')' && --depth == 0) {
          close = i;
          break;
        }
      }
      if (close == std::string_view::npos) {
        throw Error(Errc::InvalidCoverage,
                    "unbalanced parentheses in '" + std::string(expr) + "'");
      }
      parts.push_back(parse_coverage(rest.substr(1, close - 1)));
      rest.remove_prefix(close + 1);
      if (rest.empty()) break;
      if (rest.front() != '+') {
        throw Error(Errc::InvalidCoverage,
                    "union parts must be joined by '+': '" +
                        std::string(expr) + "'");
      }
      rest.remove_prefix(1);
    }
    return Coverage::union_of(std::move(parts));
  }
  throw Error(Errc::InvalidCoverage,
              "unknown coverage kind in '" + std::string(expr) + "'");
}

std::string ShardImage::reference() const {
  return id_ + "@v" + std::to_string(version_);
}

std::string record_line(const GeoRecord& r) {
  std::string line;
  line.reserve(r.postcode.size() + r.theme.size() + r.payload.size() + 28);
  line += r.postcode;
  line += '\t';
  line += r.theme;
  line += '\t';
  line += format_fixed6(r.lon);
  line += '\t';
  line += format_fixed6(r.lat);
  line += '\t';
  line += r.payload;
  return line;
}

GeoRecord parse_record_line(std::string_view line) {
  auto fields = split(line, '\t');
  if (fields.size() != 5) {
    throw Error(Errc::FormatError,
                "record line needs 5 tab-separated fields: '" +
                    std::string(line) + "'");
  }
  auto strict_coord = [&](std::string_view text, const char* name) {
    auto dot = text.find('.');
    auto micro = parse_micro(text);
    if (!micro || dot == std::string_view::npos ||
        text.size() - dot - 1 != 6) {
      throw Error(Errc::FormatError, std::string("record field '") + name +
                                         "' must be fixed 6-decimal text: '" +
                                         std::string(text) + "'");
    }
    return from_micro(*micro);
  };
  GeoRecord r;
  r.postcode = std::string(fields[0]);
  r.theme = std::string(fields[1]);
  r.lon = strict_coord(fields[2], "lon");
  r.lat = strict_coord(fields[3], "lat");
  r.payload = std::string(fields[4]);
  try {
    validate_record(r);
  } catch (const Error& e) {
    throw Error(Errc::FormatError, e.what());
  }
  return r;
}

ShardImage build_image(std::string id, std::vector<GeoRecord> records,
                       Coverage coverage, std::int64_t version,
                       const BuildOptions& options) {
  if (id.empty() || id.find_first_of(" \t\r\n") != std::string::npos) {
    throw Error(Errc::InvalidRecord, "image id must be non-empty text "
                                     "without whitespace");
  }
  if (version < 1) {
    throw Error(Errc::InvalidRecord, "image version must be positive");
  }
  for (auto& r : records) {
    r = canonicalize(std::move(r));
    validate_record(r);
    if (!coverage.contains(r)) {
      throw Error(Errc::CoverageViolation,
                  "record outside coverage " + coverage.expression() + ": " +
                      record_line(r));
    }
  }
  std::sort(records.begin(), records.end(), canonical_less);
  auto dup = std::adjacent_find(records.begin(), records.end(), same_key);
  if (dup != records.end()) {
    throw Error(Errc::DuplicateRecord, "duplicate record key: " +
                                           record_line(*dup));
  }
  if (records.size() > options.soft_cap) {
    std::string msg = "image " + id + " holds " +
                      std::to_string(records.size()) +
                      " records, above the soft cap of " +
                      std::to_string(options.soft_cap);
    if (options.warn) {
      options.warn(msg);
    } else {
      std::cerr << "warning: " << msg << '\n';
    }
  }
  ShardImage image;
  image.id_ = std::move(id);
  image.version_ = version;
  image.coverage_ = std::move(coverage);
  image.checksum_ = sha256_hex(record_section(records));
  image.records_ = std::move(records);
  return image;
}

std::string serialize_image(const ShardImage& image) {
  std::string out;
  out += kImageMagic;
  out += "\nid " + image.id();
  out += "\nversion " + std::to_string(image.version());
  out += "\ncoverage " + image.coverage().expression();
  out += "\ncount " + std::to_string(image.record_count());
  out += "\nsha256 " + image.checksum();
  out += '\n';
  out += kSeparator;
  out += '\n';
  out += record_section(image.records());
  return out;
}

ShardImage load_image(std::string_view bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string_view {
    auto nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) format_error("truncated header");
    auto line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  auto field = [&](std::string_view key) {
    auto line = next_line();
    if (!line.starts_with(key) || line.size() <= key.size() ||
        line[key.size()] != ' ') {
      format_error("expected header field '" + std::string(key) + "'");
    }
    return line.substr(key.size() + 1);
  };

  if (next_line() != kImageMagic) format_error("bad magic");
  ShardImage image;
  image.id_ = std::string(field("id"));
  if (image.id_.empty()) format_error("empty id");
  auto version = parse_int(field("version"));
  if (!version || *version < 1) format_error("bad version");
  image.version_ = *version;
  try {
    image.coverage_ = parse_coverage(field("coverage"));
  } catch (const Error& e) {
    format_error(e.what());
  }
  auto count = parse_int(field("count"));
  if (!count || *count < 0) format_error("bad count");
  auto digest = field("sha256");
  if (digest.size() != 64 ||
      !std::all_of(digest.begin(), digest.end(), [](char ch) {
        return (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f');
      })) {
    format_error("sha256 must be 64 lowercase hex digits");
  }
  if (next_line() != kSeparator) format_error("missing '---' separator");

  auto section = bytes.substr(pos);
  auto actual = sha256_hex(section);
  if (actual != digest) {
    throw Error(Errc::ChecksumMismatch, "shard image " + image.id_ +
                                            ": stored sha256 " +
                                            std::string(digest) +
                                            " but records hash to " + actual);
  }
  image.checksum_ = actual;

  if (!section.empty() && section.back() != '\n') {
    format_error("record section must end with a newline");
  }
  image.records_.reserve(static_cast<std::size_t>(*count));
  std::size_t start = 0;
  while (start < section.size()) {
    auto nl = section.find('\n', start);
    image.records_.push_back(
        parse_record_line(section.substr(start, nl - start)));
    start = nl + 1;
  }
  if (image.records_.size() != static_cast<std::size_t>(*count)) {
    format_error("count says " + std::to_string(*count) + " but found " +
                 std::to_string(image.records_.size()) + " records");
  }
  for (std::size_t i = 0; i < image.records_.size(); ++i) {
    const auto& r = image.records_[i];
    if (i > 0 && !canonical_less(image.records_[i - 1], r)) {
      throw Error(Errc::InvariantViolation,
                  "records not strictly sorted at line " +
                      std::to_string(i + 1) + ": " + record_line(r));
    }
    if (!image.coverage_.contains(r)) {
      throw Error(Errc::InvariantViolation,
                  "record outside coverage: " + record_line(r));
    }
  }
  return image;
}

std::vector<GeoRecord> scan(const ShardImage& image,
                            const QueryPredicate& pred, ScanRange range) {
  std::vector<GeoRecord> out;
  auto records = image.records();
  auto first = records.begin();
  if (pred.prefix) {
    first = std::lower_bound(records.begin(), records.end(), *pred.prefix,
                             [](const GeoRecord& r, const std::string& p) {
                               return r.postcode < p;
                             });
  }
  std::size_t skipped = 0;
  for (auto it = first; it != records.end() && out.size() < range.limit;
       ++it) {
    if (pred.prefix && !it->postcode.starts_with(*pred.prefix)) break;
    if (!pred.matches(*it)) continue;
    if (skipped < range.offset) {
      ++skipped;
      continue;
    }
    out.push_back(*it);
  }
  return out;
}

std::size_t count(const ShardImage& image, const QueryPredicate& pred) {
  auto records = image.records();
  auto first = records.begin();
  if (pred.prefix) {
    first = std::lower_bound(records.begin(), records.end(), *pred.prefix,
                             [](const GeoRecord& r, const std::string& p) {
                               return r.postcode < p;
                             });
  }
  std::size_t n = 0;
  for (auto it = first; it != records.end(); ++it) {
    if (pred.prefix && !it->postcode.starts_with(*pred.prefix)) break;
    if (pred.matches(*it)) ++n;
  }
  return n;
}

std::map<std::string, std::vector<GeoRecord>> partition_by_prefix(
    std::span<const GeoRecord> records, int prefix_len) {
  if (prefix_len < 1 || prefix_len > 5) {
    throw Error(Errc::InvalidPrefixLen,
                "prefix length must be in 1..5, got " +
                    std::to_string(prefix_len));
  }
  std::map<std::string, std::vector<GeoRecord>> buckets;
  for (const auto& r : records) {
    validate_record(r);
    buckets[r.postcode.substr(0, static_cast<std::size_t>(prefix_len))]
        .push_back(r);
  }
  return buckets;
}

std::map<Cuboid, std::vector<GeoRecord>> partition_by_cuboid(
    std::span<const GeoRecord> records, double cell_deg, double lon0,
    double lat0) {
  if (!(cell_deg > 0.0) || !std::isfinite(cell_deg) || !std::isfinite(lon0) ||
      !std::isfinite(lat0)) {
    throw Error(Errc::InvalidSpec, "cell size must be positive and finite");
  }
  auto bound = [&](double origin, long long i) {
    return origin + static_cast<double>(i) * cell_deg;
  };
  // Floor arithmetic, then nudged so the value sits inside the bounds that
  // are actually emitted for the cell.
  auto cell_of = [&](double v, double origin) {
    auto i = static_cast<long long>(std::floor((v - origin) / cell_deg));
    while (v < bound(origin, i)) --i;
    while (v >= bound(origin, i + 1)) ++i;
    return i;
  };

  std::map<Cuboid, std::vector<GeoRecord>> buckets;
  for (const auto& r : records) {
    validate_record(r);
    auto i = cell_of(r.lon, lon0);
    auto j = cell_of(r.lat, lat0);
    if (r.lat == 90.0 && bound(lat0, j) >= 90.0) --j;
    Cuboid c;
    c.theme = r.theme;
    c.lon_min = std::max(bound(lon0, i), -180.0);
    c.lon_max = std::min(bound(lon0, i + 1), 180.0);
    c.lat_min = std::max(bound(lat0, j), -90.0);
    c.lat_max = std::min(bound(lat0, j + 1), 90.0);
    buckets[std::move(c)].push_back(r);
  }
  return buckets;
}

std::string write_dataset(std::span<const GeoRecord> records) {
  std::string out(kDatasetHeader);
  out += '\n';
  out += record_section(records);
  return out;
}

std::vector<GeoRecord> read_dataset(std::string_view text) {
  auto nl = text.find('\n');
  if (text.substr(0, nl) != kDatasetHeader) {
    throw Error(Errc::FormatError, "dataset: missing '" +
                                       std::string(kDatasetHeader) +
                                       "' header");
  }
  std::vector<GeoRecord> records;
  if (nl == std::string_view::npos) return records;
  for (auto line : split(text.substr(nl + 1), '\n')) {
    if (line.empty()) continue;
    records.push_back(parse_record_line(line));
  }
  return records;
}

std::vector<GeoRecord> generate_records(std::size_t count, std::uint64_t seed,
                                        std::span<const std::string> themes) {
  static const std::string kDefaultTheme = "postcode";
  std::span<const std::string> theme_pool =
      themes.empty() ? std::span<const std::string>(&kDefaultTheme, 1)
                     : themes;
  for (const auto& t : theme_pool) {
    if (!is_valid_theme(t)) {
      throw Error(Errc::InvalidRecord, "invalid theme '" + t + "'");
    }
  }
  std::mt19937_64 rng(seed);
  auto below = [&](std::uint64_t n) { return rng() % n; };

  std::vector<GeoRecord> out;
  out.reserve(count);
  std::unordered_set<std::string> keys;
  while (out.size() < count) {
    // Each leading digit gets its own region, west to east, so prefix
    // groups have distinct centroids.
    auto digit = static_cast<int>(below(10));
    GeoRecord r;
    r.postcode = std::to_string(digit);
    for (int i = 0; i < 4; ++i) r.postcode += static_cast<char>('0' + below(10));
    MicroDegrees lon_center = -72'000'000 - digit * 5'500'000;
    MicroDegrees lat_center = 30'000'000 + (digit % 3) * 6'000'000;
    auto jitter = [&] {
      return static_cast<MicroDegrees>(below(6'000'001)) - 3'000'000;
    };
    r.lon = from_micro(lon_center + jitter());
    r.lat = from_micro(lat_center + jitter());
    r.theme = theme_pool[below(theme_pool.size())];
    r.payload = "site-" + std::to_string(out.size());
    auto key = r.postcode + '\t' + r.theme + '\t' + format_fixed6(r.lon) +
               '\t' + format_fixed6(r.lat);
    if (!keys.insert(std::move(key)).second) continue;
    out.push_back(std::move(r));
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(Errc::IoError, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace fdbs
