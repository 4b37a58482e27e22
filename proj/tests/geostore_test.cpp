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

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fdbs/error.hpp"
#include "oracles.hpp"

namespace fdbs {
namespace {

GeoRecord rec(std::string postcode, double lon, double lat,
              std::string theme = "postcode", std::string payload = "") {
  return GeoRecord{std::move(postcode), lon, lat, std::move(theme),
                   std::move(payload)};
}

std::vector<GeoRecord> synth(std::size_t n, std::uint64_t seed = 7) {
  std::vector<std::string> themes{"postcode", "climate"};
  return generate_records(n, seed, themes);
}

template <typename F>
Errc error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no fdbs::Error thrown";
  return Errc::IoError;
}

TEST(FixedDecimal, FormatsSixDigits) {
  EXPECT_EQ(format_fixed6(-84.5), "-84.500000");
  EXPECT_EQ(format_fixed6(0.0), "0.000000");
  EXPECT_EQ(format_fixed6(-0.0000004), "0.000000");
  EXPECT_EQ(format_fixed6(179.999999), "179.999999");
  EXPECT_EQ(parse_micro("-0.5"), -500000);
  EXPECT_EQ(parse_micro("12"), 12000000);
  EXPECT_FALSE(parse_micro("1.2345678"));
  EXPECT_FALSE(parse_micro("1."));
  EXPECT_FALSE(parse_micro("abc"));
}

TEST(GeoRecord, Validation) {
  EXPECT_NO_THROW(validate_record(rec("40507", -84.5, 38.0)));
  EXPECT_EQ(error_code_of([] { validate_record(rec("4050", 0, 0)); }),
            Errc::InvalidRecord);
  EXPECT_EQ(error_code_of([] { validate_record(rec("4050a", 0, 0)); }),
            Errc::InvalidRecord);
  EXPECT_EQ(error_code_of([] { validate_record(rec("40507", 180.0, 0)); }),
            Errc::InvalidRecord);
  EXPECT_NO_THROW(validate_record(rec("40507", -180.0, 90.0)));
  EXPECT_EQ(error_code_of([] { validate_record(rec("40507", 0, 90.5)); }),
            Errc::InvalidRecord);
  EXPECT_EQ(error_code_of([] { validate_record(rec("40507", 0, 0, "")); }),
            Errc::InvalidRecord);
  EXPECT_EQ(
      error_code_of([] { validate_record(rec("40507", 0, 0, "t", "a\tb")); }),
      Errc::InvalidRecord);
}

TEST(PartitionByPrefix, FirstDigitGivesAtMostTenBuckets) {
  auto records = synth(2000);
  auto buckets = partition_by_prefix(records, 1);
  EXPECT_LE(buckets.size(), 10u);
  for (const auto& [key, members] : buckets) {
    EXPECT_EQ(key.size(), 1u);
    for (const auto& r : members) EXPECT_EQ(r.postcode[0], key[0]);
  }
}

TEST(PartitionByPrefix, EmptyInputGivesEmptyMap) {
  EXPECT_TRUE(partition_by_prefix({}, 3).empty());
}

TEST(PartitionByPrefix, RejectsBadLength) {
  EXPECT_EQ(error_code_of([] { partition_by_prefix({}, 0); }),
            Errc::InvalidPrefixLen);
  EXPECT_EQ(error_code_of([] { partition_by_prefix({}, 6); }),
            Errc::InvalidPrefixLen);
}

TEST(PartitionByPrefix, MatchesBruteForceFilter) {
  auto records = synth(1000, 11);
  auto buckets = partition_by_prefix(records, 3);
  std::set<std::string> prefixes;
  for (const auto& r : records) prefixes.insert(r.postcode.substr(0, 3));
  ASSERT_EQ(buckets.size(), prefixes.size());
  std::size_t total = 0;
  for (const auto& prefix : prefixes) {
    std::vector<GeoRecord> expected;
    for (const auto& r : records) {
      if (r.postcode.compare(0, 3, prefix) == 0) expected.push_back(r);
    }
    EXPECT_EQ(buckets.at(prefix), expected) << prefix;
    total += expected.size();
  }
  EXPECT_EQ(total, records.size());
}

TEST(PartitionByCuboid, FloorArithmetic) {
  auto buckets = partition_by_cuboid(std::vector{rec("40001", 10.5, 20.5)},
                                     10.0, 0.0, 0.0);
  ASSERT_EQ(buckets.size(), 1u);
  const auto& cell = buckets.begin()->first;
  EXPECT_EQ(cell.lon_min, 10.0);
  EXPECT_EQ(cell.lon_max, 20.0);
  EXPECT_EQ(cell.lat_min, 20.0);
  EXPECT_EQ(cell.lat_max, 30.0);
  EXPECT_EQ(cell.theme, "postcode");
}

TEST(PartitionByCuboid, HalfOpenBoundary) {
  auto buckets = partition_by_cuboid(std::vector{rec("40001", 20.0, 20.5)},
                                     10.0, 0.0, 0.0);
  ASSERT_EQ(buckets.size(), 1u);
  EXPECT_EQ(buckets.begin()->first.lon_min, 20.0);
  EXPECT_EQ(buckets.begin()->first.lon_max, 30.0);
}

TEST(PartitionByCuboid, NorthPoleIsClosed) {
  auto buckets = partition_by_cuboid(
      std::vector{rec("40001", 0.5, 90.0), rec("40002", 0.5, 85.0)}, 10.0,
      0.0, 0.0);
  ASSERT_EQ(buckets.size(), 1u);
  const auto& cell = buckets.begin()->first;
  EXPECT_EQ(cell.lat_min, 80.0);
  EXPECT_EQ(cell.lat_max, 90.0);
  EXPECT_TRUE(cell.contains(rec("40001", 0.5, 90.0)));
}

TEST(PartitionByCuboid, EveryRecordInExactlyOneCuboid) {
  auto records = synth(10000, 3);
  auto buckets = partition_by_cuboid(records, 2.5, 0.3, -0.7);
  std::size_t total = 0;
  std::vector<Cuboid> cells;
  for (const auto& [cell, members] : buckets) {
    EXPECT_FALSE(members.empty());
    total += members.size();
    cells.push_back(cell);
  }
  EXPECT_EQ(total, records.size());
  // Exhaustive membership: each record is contained by exactly one cell.
  for (const auto& r : records) {
    int hits = 0;
    for (const auto& c : cells) hits += c.contains(r) ? 1 : 0;
    ASSERT_EQ(hits, 1) << record_line(r);
  }
  EXPECT_NO_THROW(Coverage::of_cuboids(cells));
}

TEST(Coverage, ExpressionRoundTrip) {
  auto prefix = Coverage::of_prefixes({"5", "4"});
  EXPECT_EQ(prefix.expression(), "prefix:4,5");
  EXPECT_EQ(parse_coverage("prefix:4,5"), prefix);

  Cuboid c{10, 20, 20, 30, "postcode"};
  auto cub = Coverage::of_cuboids({c});
  EXPECT_EQ(cub.expression(), "cuboid:theme=postcode;lon=10,20;lat=20,30");
  EXPECT_EQ(parse_coverage(cub.expression()), cub);

  auto u = Coverage::union_of({cub, prefix});
  EXPECT_EQ(u.expression(),
            "union:(cuboid:theme=postcode;lon=10,20;lat=20,30)+(prefix:4,5)");
  EXPECT_EQ(parse_coverage(u.expression()).expression(), u.expression());
  auto nested = Coverage::union_of({u, Coverage::of_prefixes({"7"})});
  EXPECT_EQ(parse_coverage(nested.expression()).expression(),
            nested.expression());
}

TEST(Coverage, RejectsNestedPrefixesAndOverlappingCuboids) {
  EXPECT_EQ(error_code_of([] { Coverage::of_prefixes({"4", "41"}); }),
            Errc::InvalidCoverage);
  EXPECT_EQ(error_code_of([] { Coverage::of_prefixes({"4", "5", "40", "6"}); }),
            Errc::InvalidCoverage);
  EXPECT_EQ(error_code_of([] {
              Coverage::of_cuboids({Cuboid{0, 10, 0, 10, "a"},
                                    Cuboid{5, 15, 5, 15, "a"}});
            }),
            Errc::InvalidCoverage);
  // Same footprint, different theme: disjoint.
  EXPECT_NO_THROW(Coverage::of_cuboids(
      {Cuboid{0, 10, 0, 10, "a"}, Cuboid{0, 10, 0, 10, "b"}}));
  EXPECT_EQ(error_code_of([] { parse_coverage("ring:1"); }),
            Errc::InvalidCoverage);
  EXPECT_EQ(error_code_of([] { parse_coverage("union:(prefix:1"); }),
            Errc::InvalidCoverage);
}

TEST(BuildImage, OrderIndependentChecksum) {
  auto records = synth(300, 5);
  auto shuffled = records;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto cov = Coverage::of_prefixes({"0", "1", "2", "3", "4", "5", "6", "7",
                                    "8", "9"});
  auto a = build_image("all", records, cov, 1);
  auto b = build_image("all", shuffled, cov, 1);
  EXPECT_EQ(a.checksum(), b.checksum());
  EXPECT_EQ(serialize_image(a), serialize_image(b));
  // A version bump with identical data shares the data digest.
  EXPECT_EQ(build_image("all", records, cov, 2).checksum(), a.checksum());
}

TEST(BuildImage, EmptyShard) {
  auto image = build_image("empty", {}, Coverage::of_prefixes({"4"}), 1);
  EXPECT_EQ(image.record_count(), 0u);
  auto loaded = load_image(serialize_image(image));
  EXPECT_EQ(loaded.record_count(), 0u);
  EXPECT_EQ(loaded.checksum(), sha256_hex(""));
}

TEST(BuildImage, RejectsCoverageViolationAndDuplicates) {
  auto cov = Coverage::of_prefixes({"4"});
  try {
    build_image("x", {rec("40001", 0, 0), rec("51234", 1, 1)}, cov, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CoverageViolation);
    EXPECT_NE(std::string(e.what()).find("51234"), std::string::npos);
  }
  EXPECT_EQ(error_code_of([&] {
              build_image("x",
                          {rec("40001", 0, 0, "postcode", "a"),
                           rec("40001", 0, 0, "postcode", "b")},
                          cov, 1);
            }),
            Errc::DuplicateRecord);
}

TEST(BuildImage, SoftCapWarns) {
  std::string warning;
  BuildOptions options;
  options.soft_cap = 10;
  options.warn = [&](std::string_view msg) { warning = msg; };
  auto records = synth(11);
  build_image("big", records,
              Coverage::of_prefixes({"0", "1", "2", "3", "4", "5", "6", "7",
                                     "8", "9"}),
              1, options);
  EXPECT_NE(warning.find("soft cap"), std::string::npos);
}

TEST(ImageFormat, BitExactLayout) {
  auto image = build_image(
      "shard-4", {rec("41000", 2, 2, "postcode", "b"), rec("40001", -0.5, 0)},
      Coverage::of_prefixes({"4"}), 3);
  std::string section =
      "40001\tpostcode\t-0.500000\t0.000000\t\n"
      "41000\tpostcode\t2.000000\t2.000000\tb\n";
  std::string expected = "FDBSIMG 1\nid shard-4\nversion 3\ncoverage "
                         "prefix:4\ncount 2\nsha256 " +
                         sha256_hex(section) + "\n---\n" + section;
  EXPECT_EQ(serialize_image(image), expected);
}

TEST(ImageFormat, RoundTripExact) {
  auto records = synth(500, 9);
  auto image = build_image(
      "all", records,
      Coverage::of_prefixes({"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"}),
      1);
  auto bytes = serialize_image(image);
  auto loaded = load_image(bytes);
  auto expected = records;
  std::sort(expected.begin(), expected.end(), oracle::key_less);
  ASSERT_EQ(loaded.record_count(), expected.size());
  EXPECT_TRUE(std::equal(expected.begin(), expected.end(),
                         loaded.records().begin()));
  EXPECT_EQ(serialize_image(loaded), bytes);
  EXPECT_EQ(loaded.reference(), "all@v1");
}

TEST(ImageFormat, FlippedByteIsChecksumMismatch) {
  auto image = build_image("s", synth(50), Coverage::of_prefixes(
      {"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"}), 1);
  auto bytes = serialize_image(image);
  auto body = bytes.find("---\n") + 4;
  bytes[body + 3] ^= 0x01;
  EXPECT_EQ(error_code_of([&] { load_image(bytes); }), Errc::ChecksumMismatch);
}

TEST(ImageFormat, MalformedInputs) {
  EXPECT_EQ(error_code_of([] { load_image("FDBSIMG 1\nid x\nvers"); }),
            Errc::FormatError);
  EXPECT_EQ(error_code_of([] { load_image(""); }), Errc::FormatError);
  EXPECT_EQ(error_code_of([] { load_image("FDBSIMG 2\n"); }),
            Errc::FormatError);

  // Valid digest over records that violate the sort invariant.
  std::string section =
      "41000\tpostcode\t2.000000\t2.000000\t\n"
      "40001\tpostcode\t0.000000\t0.000000\t\n";
  std::string unsorted = "FDBSIMG 1\nid x\nversion 1\ncoverage prefix:4\n"
                         "count 2\nsha256 " +
                         sha256_hex(section) + "\n---\n" + section;
  EXPECT_EQ(error_code_of([&] { load_image(unsorted); }),
            Errc::InvariantViolation);

  std::string outside = "FDBSIMG 1\nid x\nversion 1\ncoverage prefix:5\n"
                        "count 1\nsha256 " +
                        sha256_hex(section.substr(0, section.find('\n') + 1)) +
                        "\n---\n" + section.substr(0, section.find('\n') + 1);
  EXPECT_EQ(error_code_of([&] { load_image(outside); }),
            Errc::InvariantViolation);

  std::string wrong_count = "FDBSIMG 1\nid x\nversion 1\ncoverage prefix:4\n"
                            "count 3\nsha256 " +
                            sha256_hex(section) + "\n---\n" + section;
  EXPECT_EQ(error_code_of([&] { load_image(wrong_count); }),
            Errc::FormatError);
}

TEST(Scan, IdentityAndSaturatingPrefix) {
  auto records = synth(400, 21);
  std::vector<GeoRecord> fours;
  for (const auto& r : records) {
    if (r.postcode[0] == '4') fours.push_back(r);
  }
  auto image = build_image("s4", fours, Coverage::of_prefixes({"4"}), 1);
  auto all = scan(image, QueryPredicate::all(),
                  {0, image.record_count()});
  EXPECT_TRUE(std::equal(all.begin(), all.end(), image.records().begin(),
                         image.records().end()));
  QueryPredicate p;
  p.prefix = "4";
  EXPECT_EQ(scan(image, p).size(), image.record_count());
  EXPECT_TRUE(scan(image, p, {image.record_count() + 5, 10}).empty());
  EXPECT_TRUE(scan(image, p, {0, 0}).empty());
}

TEST(Scan, MatchesLinearScanOracleForRandomPredicates) {
  auto records = synth(1000, 33);
  auto image = build_image(
      "all", records,
      Coverage::of_prefixes({"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"}),
      1);
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    auto pred = oracle::random_predicate(rng);
    std::size_t offset = rng() % 50;
    std::size_t limit = rng() % 3 == 0 ? SIZE_MAX : rng() % 100;
    auto expected = oracle::filter_sort_slice(records, pred, offset, limit);
    EXPECT_EQ(scan(image, pred, {offset, limit}), expected);
    EXPECT_EQ(count(image, pred), oracle::brute_count(records, pred));
    // Read-only stability against a fresh load of the same bytes.
    if (trial % 50 == 0) {
      auto fresh = load_image(serialize_image(image));
      EXPECT_EQ(scan(fresh, pred, {offset, limit}), expected);
    }
  }
}

TEST(Predicate, Validation) {
  EXPECT_EQ(error_code_of([] { QueryPredicate{}.validate(); }),
            Errc::InvalidPredicate);
  QueryPredicate p;
  p.prefix = "42x";
  EXPECT_EQ(error_code_of([&] { p.validate(); }), Errc::InvalidPredicate);
  p.prefix.reset();
  p.bbox = BBox{10, 5, 0, 1};
  EXPECT_EQ(error_code_of([&] { p.validate(); }), Errc::InvalidPredicate);
  EXPECT_NO_THROW(QueryPredicate::all().validate());
}

TEST(Dataset, GeneratorIsDeterministicAndValid) {
  auto a = synth(10000, 42);
  auto b = synth(10000, 42);
  EXPECT_EQ(write_dataset(a), write_dataset(b));
  std::set<std::string> keys;
  for (const auto& r : a) {
    EXPECT_NO_THROW(validate_record(r));
    auto line = record_line(r);
    keys.insert(line.substr(0, line.rfind('\t')));
  }
  EXPECT_EQ(keys.size(), a.size());
  EXPECT_EQ(read_dataset(write_dataset(a)), a);
  EXPECT_EQ(write_dataset({}), "# fdbs dataset 1\n");
  EXPECT_TRUE(read_dataset("# fdbs dataset 1\n").empty());
}

}  // namespace
}  // namespace fdbs
