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

#include "fdbs/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fdbs/api.hpp"
#include "fdbs/geostore.hpp"
#include "oracles.hpp"

namespace fdbs::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("fdbs-cli-" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fdbs");
    std::ostringstream out, err;
    Outcome r;
    r.code = run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  // gen -> partition -> build -> deploy; returns the topology path.
  std::string pipeline(std::size_t count, const std::string& extra = "") {
    EXPECT_EQ(cli({"gen", "--count", std::to_string(count), "--seed", "5", "-o",
                   path("data.tsv")}).code, 0);
    EXPECT_EQ(cli({"partition", "--in", path("data.tsv"), "--out-dir",
                   path("parts")}).code, 0);
    EXPECT_EQ(cli({"build", "--manifest", path("parts/manifest.tsv"), "--out-dir",
                   path("images")}).code, 0);
    std::vector<std::string> deploy{"deploy", "-o", path("topo.txt"),
                                    "--replicas", "2"};
    if (!extra.empty()) {
      deploy.push_back("--fanout");
      deploy.push_back(extra);
    }
    for (const auto& e : fs::directory_iterator(dir_ / "images")) {
      deploy.push_back(e.path().string());
    }
    auto r = cli(deploy);
    EXPECT_EQ(r.code, 0) << r.err;
    return path("topo.txt");
  }

  fs::path dir_;
};

TEST_F(Cli, GenEmptyAndDeterministic) {
  ASSERT_EQ(cli({"gen", "--count", "0", "-o", path("empty.tsv")}).code, 0);
  EXPECT_EQ(slurp(path("empty.tsv")), "# fdbs dataset 1\n");
  cli({"gen", "--count", "500", "--seed", "9", "-o", path("a.tsv")});
  cli({"gen", "--count", "500", "--seed", "9", "-o", path("b.tsv")});
  EXPECT_EQ(slurp(path("a.tsv")), slurp(path("b.tsv")));
  cli({"gen", "--count", "500", "--seed", "10", "-o", path("c.tsv")});
  EXPECT_NE(slurp(path("a.tsv")), slurp(path("c.tsv")));
}

TEST_F(Cli, GeneratedRecordsAreValid) {
  ASSERT_EQ(cli({"gen", "--count", "10000", "-o", path("d.tsv")}).code, 0);
  auto records = read_dataset(slurp(path("d.tsv")));
  ASSERT_EQ(records.size(), 10000u);
  for (const auto& r : records) {
    ASSERT_NO_THROW(validate_record(r));
    ASSERT_EQ(r.postcode.size(), 5u);
  }
}

TEST_F(Cli, PipelineReturnsEveryRecord) {
  for (const std::string fanout : {"", "3"}) {
    auto topo = pipeline(1500, fanout);
    auto r = cli({"--format", "json", "query", "--topology", topo, "records"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto body = api::Json::parse(r.out);
    auto want = read_dataset(slurp(path("data.tsv")));
    std::sort(want.begin(), want.end(), oracle::key_less);
    ASSERT_EQ(body["count"], want.size());
    ASSERT_EQ(body["records"].size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      ASSERT_EQ(api::record_from_json(body["records"][i]), canonicalize(want[i]));
    }
    fs::remove_all(dir_ / "images");
  }
}

TEST_F(Cli, UpdateSameImageIsNoOp) {
  auto topo = pipeline(400);
  auto img = path("images/prefix-3.v1.img");
  auto r = cli({"update", "--topology", topo, "--leaf", "prefix-3", "--image", img});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("no-op"), std::string::npos);

  ASSERT_EQ(cli({"build", "--manifest", path("parts/manifest.tsv"), "--out-dir",
                 path("images"), "--version", "2"}).code, 0);
  r = cli({"--format", "tsv", "update", "--topology", topo, "--leaf", "prefix-3",
           "--image", path("images/prefix-3.v2.img")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("prefix-3@v2"), std::string::npos);
  EXPECT_NE(slurp(topo).find("prefix-3.v2.img"), std::string::npos);
  // The topology now serves v2.
  r = cli({"query", "--topology", topo, "catalog"});
  EXPECT_EQ(r.code, 0);
}

TEST_F(Cli, BenchIsDeterministic) {
  auto a = cli({"bench", "--grid", "500:4000:500", "--seed", "3"});
  auto b = cli({"bench", "--grid", "500:4000:500", "--seed", "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("crossover 1->2"), std::string::npos);
  auto c = cli({"bench", "--grid", "500:4000:500", "--seed", "4"});
  EXPECT_NE(a.out, c.out);
}

TEST_F(Cli, ExitCodes) {
  auto topo = pipeline(200);
  auto r = cli({"query", "--topology", topo, "records", "prefix=4x"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("prefix"), std::string::npos);
  EXPECT_EQ(cli({"query", "--topology", path("missing.txt"), "count"}).code, 1);
  EXPECT_EQ(cli({"nonsense"}).code, 1);
  EXPECT_EQ(cli({"gen", "--count", "x"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
  // Nothing listens here: the gateway is unavailable, an internal failure.
  EXPECT_EQ(cli({"query", "--url", "127.0.0.1:1", "count"}).code, 2);
}

TEST_F(Cli, SettingsPrecedence) {
  std::ofstream(path("cfg")) << "# comment\ncount=7\nseed=2\n";
  ASSERT_EQ(cli({"--config", path("cfg"), "gen", "-o", path("f.tsv")}).code, 0);
  EXPECT_EQ(read_dataset(slurp(path("f.tsv"))).size(), 7u);
  ::setenv("FDBS_COUNT", "9", 1);
  cli({"--config", path("cfg"), "gen", "-o", path("e.tsv")});
  EXPECT_EQ(read_dataset(slurp(path("e.tsv"))).size(), 9u);
  cli({"--config", path("cfg"), "gen", "--count", "11", "-o", path("g.tsv")});
  ::unsetenv("FDBS_COUNT");
  EXPECT_EQ(read_dataset(slurp(path("g.tsv"))).size(), 11u);
  // Required settings may come from the file.
  auto topo = pipeline(100);
  std::ofstream(path("cfg2")) << "topology=" << topo << "\n";
  auto r = cli({"--config", path("cfg2"), "topology"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("prefix-0"), std::string::npos);
}

TEST_F(Cli, CuboidPartition) {
  cli({"gen", "--count", "800", "-o", path("data.tsv")});
  auto r = cli({"--format", "tsv", "partition", "--in", path("data.tsv"),
                "--strategy", "cuboid", "--cell", "20", "--out-dir", path("cells")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t total = 0;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    total += std::stoul(line.substr(line.find('\t') + 1));
  }
  EXPECT_EQ(total, 800u);
  EXPECT_EQ(cli({"build", "--manifest", path("cells/manifest.tsv"), "--out-dir",
                 path("cimg")}).code, 0);
}

}  // namespace
}  // namespace fdbs::cli
