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

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "fdbs/api.hpp"
#include "fdbs/costmodel.hpp"
#include "fdbs/engine.hpp"
#include "fdbs/error.hpp"
#include "fdbs/geostore.hpp"
#include "fdbs/server.hpp"
#include "fdbs/text.hpp"
#include "fdbs/topology.hpp"

namespace fdbs::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
}

// "key=value" lines, '#' comments.
std::map<std::string, std::string> read_config(const fs::path& path) {
  std::map<std::string, std::string> out;
  std::size_t n = 0;
  auto text = read_file(path);
  for (auto line : split(text, '\n')) {
    ++n;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::BadRequest, path.string() + " line " +
                                        std::to_string(n) + ": expected key=value");
    }
    out[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

std::string env_name(std::string key) {
  std::string out = "FDBS_";
  for (char c : key) out += c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return out;
}

// Output rows either aligned or tab-separated.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& out, bool tsv) const {
    if (tsv) {
      out << join(header_, "\t") << "\n";
      for (const auto& r : rows_) out << join(r, "\t") << "\n";
      return;
    }
    std::vector<std::size_t> w(header_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = header_[i].size();
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) {
        w[i] = std::max(w[i], r[i].size());
      }
    }
    auto line = [&](const std::vector<std::string>& r) {
      std::string s;
      for (std::size_t i = 0; i < r.size(); ++i) {
        s += r[i];
        if (i + 1 < r.size()) s += std::string(w[i] - r[i].size() + 2, ' ');
      }
      out << s << "\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string cell(const api::Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "-";
  return v.dump();
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

struct TopologyFile {
  topology::TopologySpec spec;
  std::map<std::string, std::shared_ptr<const ShardImage>> images;
};

std::shared_ptr<const ShardImage> load_image_file(const fs::path& path) {
  return std::make_shared<const ShardImage>(load_image(read_file(path)));
}

// Image paths are relative to the topology file.
TopologyFile load_topology(const fs::path& path) {
  TopologyFile t;
  t.spec = topology::parse_topology(read_file(path));
  for (const auto& leaf : t.spec.leaves) {
    t.images[leaf.name] = load_image_file(path.parent_path() / leaf.image_path);
  }
  return t;
}

std::string relative_to(const fs::path& file, const fs::path& dir) {
  auto rel = fs::relative(fs::absolute(file), fs::absolute(dir));
  return rel.empty() ? fs::absolute(file).string() : rel.generic_string();
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool tsv = false;
};

// Result of running a handler, in process or over HTTP.
struct Reply {
  int status = 0;
  api::Json body;
  std::string source;
};

void raise_reply(const Reply& r) {
  if (r.status == 200) return;
  auto code = Errc::IoError;
  std::string message = r.body.dump();
  if (r.body.contains("error")) {
    const auto& e = r.body["error"];
    code = errc_from_name(e.value("code", "")).value_or(Errc::IoError);
    message = e.value("message", message);
  }
  throw Error(code, message);
}

// ---- subcommands ----

struct GenArgs {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  std::string themes = "postcode,climate";
  std::string out = "-";
};

void cmd_gen(Context& ctx, const GenArgs& a) {
  std::vector<std::string> themes;
  for (auto t : split(a.themes, ',')) themes.emplace_back(t);
  auto text = write_dataset(generate_records(a.count, a.seed, themes));
  if (a.out == "-") {
    ctx.out << text;
  } else {
    write_file(a.out, text);
    ctx.out << "wrote " << a.count << " records to " << a.out << "\n";
  }
}

struct PartitionArgs {
  std::string in;
  std::string strategy = "prefix";
  int prefix_len = 1;
  double cell = 10.0;
  double lon0 = -180.0;
  double lat0 = -90.0;
  std::string out_dir;
};

void cmd_partition(Context& ctx, const PartitionArgs& a) {
  auto records = read_dataset(read_file(a.in));
  std::vector<std::tuple<std::string, std::string, std::vector<GeoRecord>>> parts;
  if (a.strategy == "prefix") {
    for (auto& [prefix, rs] : partition_by_prefix(records, a.prefix_len)) {
      parts.emplace_back("prefix-" + prefix,
                         Coverage::of_prefixes({prefix}).expression(), std::move(rs));
    }
  } else if (a.strategy == "cuboid") {
    int i = 0;
    for (auto& [c, rs] : partition_by_cuboid(records, a.cell, a.lon0, a.lat0)) {
      parts.emplace_back("cell-" + std::to_string(i++),
                         Coverage::of_cuboids({c}).expression(), std::move(rs));
    }
  } else {
    throw Error(Errc::BadRequest, "unknown strategy: " + a.strategy);
  }
  std::string manifest = "file\tcoverage\n";
  Table table({"part", "records", "coverage"});
  for (const auto& [name, coverage, rs] : parts) {
    write_file(fs::path(a.out_dir) / (name + ".tsv"), write_dataset(rs));
    manifest += name + ".tsv\t" + coverage + "\n";
    table.add({name, std::to_string(rs.size()), coverage});
  }
  write_file(fs::path(a.out_dir) / "manifest.tsv", manifest);
  table.print(ctx.out, ctx.tsv);
}

struct BuildArgs {
  std::string manifest;
  std::string out_dir;
  std::int64_t version = 1;
};

void cmd_build(Context& ctx, const BuildArgs& a) {
  fs::path manifest(a.manifest);
  auto text = read_file(manifest);
  auto lines = split(text, '\n');
  Table table({"image", "records", "checksum", "file"});
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto line = trim(lines[i]);
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 2) {
      throw Error(Errc::FormatError, a.manifest + " line " + std::to_string(i + 1) +
                                         ": expected file<TAB>coverage");
    }
    fs::path data = manifest.parent_path() / std::string(f[0]);
    std::string id = data.stem().string();
    auto image = build_image(id, read_dataset(read_file(data)),
                             parse_coverage(f[1]), a.version);
    auto file = fs::path(a.out_dir) / (id + ".v" + std::to_string(a.version) + ".img");
    write_file(file, serialize_image(image));
    table.add({image.reference(), std::to_string(image.record_count()),
               image.checksum().substr(0, 12), file.string()});
  }
  table.print(ctx.out, ctx.tsv);
}

struct ClusterArgs {
  std::uint64_t seed = 1;
  int readiness_delay = 2;
  int replicas = 1;
  double crossover = 3000.0;
};

struct DeployArgs {
  ClusterArgs cluster;
  std::vector<std::string> images;
  std::string out;
  int fanout = 0;  // >0 nests leaves under federations of this size
};

void print_pods(Context& ctx, topology::Topology& topo) {
  Table table({"federation", "deployment", "pod", "phase", "image", "address"});
  for (const auto& name : topo.node_names()) {
    auto& node = topo.node(name);
    for (const auto& dep : node.cluster().deployment_ids()) {
      for (const auto& pod : node.cluster().pods(dep)) {
        table.add({name, dep, pod.pod_id, std::string(sim::phase_name(pod.phase)),
                   pod.image_id, pod.address});
      }
    }
  }
  table.print(ctx.out, ctx.tsv);
}

void cmd_deploy(Context& ctx, const DeployArgs& a) {
  topology::TopologySpec spec;
  spec.seed = a.cluster.seed;
  spec.readiness_delay = a.cluster.readiness_delay;
  spec.replicas = a.cluster.replicas;
  spec.crossover = a.cluster.crossover;
  fs::path out(a.out);
  auto dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  std::map<std::string, std::shared_ptr<const ShardImage>> images;
  for (const auto& file : a.images) {
    auto img = load_image_file(file);
    if (images.contains(img->id())) {
      throw Error(Errc::NameConflict, "two images named " + img->id());
    }
    images[img->id()] = img;
    spec.leaves.push_back({img->id(), relative_to(file, dir)});
  }
  if (a.fanout > 0 && spec.leaves.size() > static_cast<std::size_t>(a.fanout)) {
    topology::FederationSpec root{"root", {}};
    for (std::size_t i = 0; i < spec.leaves.size(); i += a.fanout) {
      topology::FederationSpec fed{"fed-" + std::to_string(i / a.fanout), {}};
      for (std::size_t j = i; j < std::min(spec.leaves.size(), i + a.fanout); ++j) {
        fed.children.push_back(spec.leaves[j].name);
      }
      root.children.push_back(fed.name);
      spec.federations.push_back(std::move(fed));
    }
    spec.federations.push_back(std::move(root));
  }
  auto topo = topology::Topology::build(spec, images);
  write_file(out, topology::format_topology(spec));
  print_pods(ctx, *topo);
}

struct QueryArgs {
  std::string topology;
  std::string url;
  std::string path;
  std::vector<std::string> params;
  std::string format;
};

Reply run_query(const QueryArgs& a, const api::ApiRequest& request) {
  if (!a.url.empty()) {
    auto hp = a.url;
    if (hp.starts_with("http://")) hp = hp.substr(7);
    auto colon = hp.rfind(':');
    if (colon == std::string::npos) {
      throw Error(Errc::BadRequest, "url needs host:port: " + a.url);
    }
    int port = std::stoi(hp.substr(colon + 1));
    auto r = server::http_request(hp.substr(0, colon), port, request);
    return {r.status, api::Json::parse(r.body), r.source};
  }
  if (a.topology.empty()) {
    throw Error(Errc::BadRequest, "query needs --topology or --url");
  }
  auto t = load_topology(a.topology);
  auto topo = topology::Topology::build(t.spec, t.images);
  auto r = topo->handle(request);
  return {r.status, r.body, api::format_source(r.source)};
}

void cmd_query(Context& ctx, const QueryArgs& a) {
  api::ApiRequest request;
  request.path = a.path.starts_with("/") ? a.path : "/" + a.path;
  for (const auto& p : a.params) {
    auto eq = p.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::BadRequest, "query parameter needs key=value: " + p);
    }
    if (!request.params.emplace(p.substr(0, eq), p.substr(eq + 1)).second) {
      throw Error(Errc::BadRequest, "repeated parameter: " + p.substr(0, eq));
    }
  }
  auto reply = run_query(a, request);
  raise_reply(reply);
  if (a.format == "json") {
    ctx.out << reply.body.dump() << "\n";
    return;
  }
  // The first array in the body becomes the table; scalars are a footer.
  const api::Json* rows = nullptr;
  for (const auto& [key, value] : reply.body.items()) {
    if (value.is_array() && !rows) rows = &value;
  }
  if (rows && !rows->empty() && rows->front().is_object()) {
    // Known columns first, in reading order, then anything else.
    static const std::vector<std::string> preferred{
        "name", "prefix", "postcode", "theme", "lon", "lat", "count", "distance"};
    std::vector<std::string> header;
    for (const auto& k : preferred) {
      if (rows->front().contains(k)) header.push_back(k);
    }
    for (const auto& [key, value] : rows->front().items()) {
      if (std::find(header.begin(), header.end(), key) == header.end()) {
        header.push_back(key);
      }
    }
    Table table(header);
    for (const auto& row : *rows) {
      std::vector<std::string> cells;
      for (const auto& h : header) {
        cells.push_back(row.contains(h) ? cell(row[h]) : "");
      }
      table.add(std::move(cells));
    }
    table.print(ctx.out, ctx.tsv);
  }
  if (!ctx.tsv || !rows) {
    for (const auto& [key, value] : reply.body.items()) {
      if (!value.is_array() && !value.is_object()) {
        ctx.out << key << (ctx.tsv ? "\t" : ": ") << cell(value) << "\n";
      } else if (value.is_object()) {
        ctx.out << key << (ctx.tsv ? "\t" : ": ") << value.dump() << "\n";
      }
    }
  }
}

struct UpdateArgs {
  std::string topology;
  std::string leaf;
  std::string image;
  int max_steps = 100;
  bool trace = false;
};

void cmd_update(Context& ctx, const UpdateArgs& a) {
  fs::path tpath(a.topology);
  auto t = load_topology(tpath);
  auto topo = topology::Topology::build(t.spec, t.images);
  auto image = load_image_file(a.image);
  auto& home = topo->home_of(a.leaf);
  if (!home.cluster().has_image(image->reference())) {
    home.cluster().register_image(image);
  }
  sim::UpdateOptions opts;
  opts.max_steps = a.max_steps;
  auto report = home.cluster().rolling_update(a.leaf, image->reference(), opts);
  if (report.no_op) {
    ctx.out << "no-op: " << a.leaf << " already runs " << image->reference() << "\n";
    return;
  }
  if (a.trace) ctx.out << sim::trace_text(report.trace);
  Table table({"deployment", "image", "steps", "created", "terminated", "min_ready"});
  table.add({a.leaf, image->reference(), std::to_string(report.steps),
             std::to_string(report.created), std::to_string(report.terminated),
             std::to_string(report.min_ready)});
  table.print(ctx.out, ctx.tsv);
  for (auto& leaf : t.spec.leaves) {
    if (leaf.name == a.leaf) {
      leaf.image_path = relative_to(a.image, tpath.has_parent_path()
                                                 ? tpath.parent_path()
                                                 : fs::path("."));
    }
  }
  write_file(tpath, topology::format_topology(t.spec));
}

struct ServeArgs {
  std::string topology;
  std::string host = "127.0.0.1";
  int port = 8080;
};

void cmd_serve(Context& ctx, const ServeArgs& a) {
  auto t = load_topology(a.topology);
  auto topo = topology::Topology::build(t.spec, t.images);
  server::HttpServer srv([&](const api::ApiRequest& r) { return topo->handle(r); });
  srv.run(a.host, a.port, [&] {
    ctx.out << "serving " << t.spec.root << " on " << a.host << ":" << a.port
            << std::endl;
  });
}

struct BenchArgs {
  std::string mode = "simulated";
  std::string topology;
  std::string prefix;
  std::string grid = "500:10000:500";
  std::string levels = "1,2";
  int reps = 1;
  std::uint64_t seed = 1;
  double noise = 0.05;
  double overhead1 = 50.0, per_row1 = 0.02;
  double overhead2 = 110.0, per_row2 = 0.011;
  std::string samples_out;
  std::string models_out;
  std::string plot_out;
};

std::vector<std::int64_t> parse_grid(const std::string& text) {
  auto f = split(text, ':');
  if (f.size() != 3) throw Error(Errc::BadRequest, "grid must be from:to:step");
  auto num = [&](std::string_view s) {
    try {
      return std::stoll(std::string(s));
    } catch (const std::exception&) {
      throw Error(Errc::BadRequest, "bad grid value: " + std::string(s));
    }
  };
  std::int64_t from = num(f[0]), to = num(f[1]), step = num(f[2]);
  if (from < 1 || step < 1 || to < from) {
    throw Error(Errc::BadRequest, "grid needs 1 <= from <= to and step >= 1");
  }
  std::vector<std::int64_t> out;
  for (auto r = from; r <= to; r += step) out.push_back(r);
  return out;
}

void cmd_bench(Context& ctx, const BenchArgs& a) {
  cost::Workload w;
  w.rows_grid = parse_grid(a.grid);
  w.levels.clear();
  for (auto l : split(a.levels, ',')) w.levels.push_back(std::stoi(std::string(l)));
  w.repetitions = a.reps;
  w.seed = a.seed;
  w.noise = a.noise;
  if (a.mode == "simulated") {
    w.mode = cost::BenchMode::Simulated;
    w.simulated[1] = {a.overhead1, a.per_row1};
    w.simulated[2] = {a.overhead2, a.per_row2};
  } else if (a.mode == "real") {
    w.mode = cost::BenchMode::Real;
  } else {
    throw Error(Errc::BadRequest, "unknown bench mode: " + a.mode);
  }

  // The benchmark target: a topology's root, or one generated leaf large
  // enough for the grid.
  std::unique_ptr<topology::Topology> topo;
  QueryPredicate pred = QueryPredicate::all();
  if (!a.topology.empty()) {
    auto t = load_topology(a.topology);
    topo = topology::Topology::build(t.spec, t.images);
    if (!a.prefix.empty()) {
      pred = QueryPredicate{};
      pred.prefix = a.prefix;
    }
  } else {
    std::vector<std::string> themes{"postcode"};
    auto records = generate_records(
        static_cast<std::size_t>(w.rows_grid.back()), a.seed, themes);
    auto image = std::make_shared<const ShardImage>(build_image(
        "bench", std::move(records), Coverage::of_prefixes({"0", "1", "2", "3", "4",
                                                            "5", "6", "7", "8", "9"}),
        1));
    topology::TopologySpec spec;
    spec.seed = a.seed;
    spec.readiness_delay = 0;
    spec.replicas = 2;
    spec.leaves.push_back({"bench", ""});
    topo = topology::Topology::build(spec, {{"bench", image}});
  }
  auto& root = topo->root();
  auto runner = engine::make_runner(
      root.catalog(),
      [&root](const std::string& id, const api::ApiRequest& r) {
        return root.cluster().call(id, r);
      },
      pred);
  auto samples = cost::benchmark(runner, w);
  auto model = cost::CostModel::fit(samples);

  Table models({"level", "intercept_ms", "slope_ms_per_row", "r_squared", "n"});
  for (const auto& [level, m] : model.models()) {
    models.add({std::to_string(level), fixed(m.intercept_ms, 3),
                fixed(m.slope_ms_per_row, 6), fixed(m.r_squared, 4),
                std::to_string(m.sample_count)});
  }
  models.print(ctx.out, ctx.tsv);
  for (const auto& [pair, rows] : model.crossovers()) {
    ctx.out << "crossover " << pair.first << "->" << pair.second << ": "
            << fixed(rows, 1) << " rows\n";
  }

  std::vector<std::string> header{"rows"};
  for (int l : w.levels) header.push_back("k=" + std::to_string(l) + "_ms");
  header.push_back("best");
  Table cmp(header);
  std::map<std::pair<std::int64_t, int>, std::pair<double, int>> acc;
  for (const auto& s : samples) {
    auto& [sum, n] = acc[{s.rows, s.concurrency}];
    sum += s.elapsed_ms;
    ++n;
  }
  for (auto rows : w.rows_grid) {
    std::vector<std::string> row{std::to_string(rows)};
    for (int l : w.levels) {
      auto [sum, n] = acc[{rows, l}];
      row.push_back(fixed(sum / n, 3));
    }
    row.push_back(std::to_string(model.lookup_best(rows)));
    cmp.add(std::move(row));
  }
  ctx.out << "\n";
  cmp.print(ctx.out, ctx.tsv);

  if (!a.samples_out.empty()) write_file(a.samples_out, cost::samples_to_csv(samples));
  if (!a.models_out.empty()) write_file(a.models_out, cost::models_to_text(model));
  if (!a.plot_out.empty()) write_file(a.plot_out, cost::gnuplot_data(samples, model));
}

struct TopologyArgs {
  std::string topology;
  std::string node;
};

void cmd_topology(Context& ctx, const TopologyArgs& a) {
  auto t = load_topology(a.topology);
  auto topo = topology::Topology::build(t.spec, t.images);
  auto& node = a.node.empty() ? topo->root() : topo->node(a.node);
  auto entries = node.catalog().snapshot();
  if (ctx.tsv) {
    ctx.out << catalog::export_text(entries);
    return;
  }
  Table table({"name", "service", "kind", "capabilities", "coverage"});
  for (const auto& e : entries) {
    std::vector<std::string> caps;
    for (auto c : e.capabilities) caps.emplace_back(catalog::capability_name(c));
    table.add({e.name, e.service_id, std::string(catalog::kind_name(e.kind)),
               join(caps, ","), e.coverage.expression()});
  }
  table.print(ctx.out, ctx.tsv);
}

// Options that may also come from the environment or the config file.
struct Fallbacks {
  struct Entry {
    CLI::Option* opt;
    std::string key;
    CLI::App* app;
  };
  std::vector<Entry> options;

  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& key, T& target,
                   const std::string& help) {
    auto* opt = app->add_option("--" + key, target, help)
                    ->envname(env_name(key))
                    ->capture_default_str();
    options.push_back({opt, key, app});
    return opt;
  }

  void apply(const std::map<std::string, std::string>& config) {
    for (auto& [opt, key, app] : options) {
      if (opt->count() > 0) continue;
      auto it = config.find(key);
      if (it == config.end()) continue;
      opt->clear();
      opt->add_result(it->second);
      opt->run_callback();
    }
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"fdbs: federated read-only geospatial database", "fdbs"};
  app.require_subcommand(1);
  std::string config_path;
  std::string format = "table";
  app.add_option("--config", config_path, "key=value settings file")
      ->envname("FDBS_CONFIG");
  app.add_option("--format", format, "table, tsv, or json (query only)")
      ->check(CLI::IsMember({"table", "tsv", "json"}))
      ->envname("FDBS_FORMAT");
  Fallbacks fb;

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset");
  fb.add(gen_cmd, "count", gen.count, "records");
  fb.add(gen_cmd, "seed", gen.seed, "generator seed");
  fb.add(gen_cmd, "themes", gen.themes, "comma-separated themes");
  gen_cmd->add_option("-o,--out", gen.out, "dataset file, - for stdout");

  PartitionArgs part;
  auto* part_cmd = app.add_subcommand("partition", "split a dataset into parts");
  part_cmd->add_option("--in", part.in, "dataset file")->required();
  part_cmd->add_option("--strategy", part.strategy, "prefix or cuboid")
      ->check(CLI::IsMember({"prefix", "cuboid"}));
  fb.add(part_cmd, "prefix-len", part.prefix_len, "prefix length");
  fb.add(part_cmd, "cell", part.cell, "cuboid cell size in degrees");
  part_cmd->add_option("--lon0", part.lon0, "cuboid grid origin longitude");
  part_cmd->add_option("--lat0", part.lat0, "cuboid grid origin latitude");
  part_cmd->add_option("--out-dir", part.out_dir, "output directory")->required();

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "build shard images");
  build_cmd->add_option("--manifest", build.manifest, "partition manifest")->required();
  build_cmd->add_option("--out-dir", build.out_dir, "image directory")->required();
  build_cmd->add_option("--version", build.version, "image version");

  ClusterArgs cluster;
  DeployArgs deploy;
  auto* deploy_cmd = app.add_subcommand("deploy", "write and stand up a topology");
  deploy_cmd->add_option("images", deploy.images, "image files")->required();
  deploy_cmd->add_option("-o,--out", deploy.out, "topology file")->required();
  fb.add(deploy_cmd, "seed", cluster.seed, "cluster seed");
  fb.add(deploy_cmd, "readiness-delay", cluster.readiness_delay, "steps to Ready");
  fb.add(deploy_cmd, "replicas", cluster.replicas, "replicas per leaf");
  fb.add(deploy_cmd, "crossover", cluster.crossover, "planner split threshold (rows)");
  fb.add(deploy_cmd, "fanout", deploy.fanout, "leaves per sub-federation, 0 for flat");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "serve a topology over HTTP");
  fb.add(serve_cmd, "topology", serve.topology, "topology file")->required();
  fb.add(serve_cmd, "host", serve.host, "bind address");
  fb.add(serve_cmd, "port", serve.port, "bind port");

  QueryArgs query;
  auto* query_cmd = app.add_subcommand("query", "run one read");
  fb.add(query_cmd, "topology", query.topology, "topology file");
  fb.add(query_cmd, "url", query.url, "gateway host:port instead of a topology");
  query_cmd->add_option("path", query.path, "records, count, groups, centroids, knn, catalog")
      ->required();
  query_cmd->add_option("params", query.params, "key=value parameters");

  UpdateArgs update;
  auto* update_cmd = app.add_subcommand("update", "rolling update of one leaf");
  fb.add(update_cmd, "topology", update.topology, "topology file")->required();
  update_cmd->add_option("--leaf", update.leaf, "leaf deployment")->required();
  update_cmd->add_option("--image", update.image, "new image file")->required();
  fb.add(update_cmd, "max-steps", update.max_steps, "step budget");
  update_cmd->add_flag("--trace", update.trace, "print the transition trace");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "benchmark and fit the cost model");
  bench_cmd->add_option("--mode", bench.mode, "simulated or real")
      ->check(CLI::IsMember({"simulated", "real"}));
  fb.add(bench_cmd, "topology", bench.topology, "topology to query");
  bench_cmd->add_option("--prefix", bench.prefix, "restrict to one prefix");
  fb.add(bench_cmd, "grid", bench.grid, "rows from:to:step");
  bench_cmd->add_option("--levels", bench.levels, "concurrency levels");
  fb.add(bench_cmd, "reps", bench.reps, "repetitions per cell");
  fb.add(bench_cmd, "seed", bench.seed, "noise and data seed");
  fb.add(bench_cmd, "noise", bench.noise, "relative noise");
  bench_cmd->add_option("--overhead1", bench.overhead1, "simulated k=1 overhead ms");
  bench_cmd->add_option("--per-row1", bench.per_row1, "simulated k=1 ms per row");
  bench_cmd->add_option("--overhead2", bench.overhead2, "simulated k=2 overhead ms");
  bench_cmd->add_option("--per-row2", bench.per_row2, "simulated k=2 ms per row");
  bench_cmd->add_option("--samples-out", bench.samples_out, "samples csv");
  bench_cmd->add_option("--models-out", bench.models_out, "fitted models");
  bench_cmd->add_option("--plot-out", bench.plot_out, "gnuplot data");

  TopologyArgs topo;
  auto* topo_cmd = app.add_subcommand("topology", "print a node's catalog");
  fb.add(topo_cmd, "topology", topo.topology, "topology file")->required();
  topo_cmd->add_option("--node", topo.node, "federation name, root by default");

  // args is argv-style; CLI11 takes the rest reversed.
  std::vector<std::string> argv_rev(args.rbegin(),
                                    args.rend() - (args.empty() ? 0 : 1));
  try {
    // Required options may come from the config file, so check them after
    // the fallbacks are applied.
    std::vector<Fallbacks::Entry> required;
    for (auto& e : fb.options) {
      if (e.opt->get_required()) {
        e.opt->required(false);
        required.push_back(e);
      }
    }
    app.parse(argv_rev);
    if (!config_path.empty()) fb.apply(read_config(config_path));
    for (auto& e : required) {
      if (e.app->parsed() && e.opt->count() == 0) {
        throw CLI::RequiredError(e.opt->get_name());
      }
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return is_user_error(e.code()) ? 1 : 2;
  }

  Context ctx{out, err, format == "tsv"};
  query.format = format;
  try {
    if (gen_cmd->parsed()) cmd_gen(ctx, gen);
    if (part_cmd->parsed()) cmd_partition(ctx, part);
    if (build_cmd->parsed()) cmd_build(ctx, build);
    if (deploy_cmd->parsed()) {
      deploy.cluster = cluster;
      cmd_deploy(ctx, deploy);
    }
    if (serve_cmd->parsed()) cmd_serve(ctx, serve);
    if (query_cmd->parsed()) cmd_query(ctx, query);
    if (update_cmd->parsed()) cmd_update(ctx, update);
    if (bench_cmd->parsed()) cmd_bench(ctx, bench);
    if (topo_cmd->parsed()) cmd_topology(ctx, topo);
  } catch (const Error& e) {
    err << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return is_user_error(e.code()) ? 1 : 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace fdbs::cli
