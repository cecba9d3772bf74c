#include "symgraph/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "symgraph/errors.hpp"

namespace symgraph {

using nlohmann::json;

namespace {

std::string next_content_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    return line;
  }
  return {};
}

}  // namespace

void write_graph(std::ostream& out, const Graph& g) {
  out << "n " << g.n() << "\n";
  for (std::int64_t e = 0; e < g.num_slots(); ++e) {
    if (!g.has_edge(e)) continue;
    const auto [u, v] = edge_endpoints(g.n(), e);
    out << u << " " << v << "\n";
  }
}

std::optional<Graph> read_next_graph(std::istream& in) {
  std::string line = next_content_line(in);
  if (line.empty()) return std::nullopt;
  std::istringstream header(line);
  std::string tag;
  int n = 0;
  if (!(header >> tag >> n) || tag != "n") throw invalid_input("read_graph: expected 'n <n>' header");
  Graph g(n);
  while (in) {
    const auto pos = in.tellg();
    line = next_content_line(in);
    if (line.empty()) break;
    if (line[0] == 'n') {  // next block
      in.seekg(pos);
      break;
    }
    std::istringstream row(line);
    int u = 0, v = 0;
    if (!(row >> u >> v)) throw invalid_input("read_graph: malformed edge line");
    g.set_edge(edge_index(n, u, v), true);
  }
  return g;
}

Graph read_graph(std::istream& in) {
  auto g = read_next_graph(in);
  if (!g) throw invalid_input("read_graph: empty input");
  return *g;
}

void write_partition(std::ostream& out, const EdgePartition& part) {
  out << "n " << part.n() << " k " << part.k() << "\n";
  for (std::int64_t e = 0; e < part.num_edges(); ++e) out << e << " " << part.part_of(e) << "\n";
}

EdgePartition read_partition(std::istream& in) {
  std::string line = next_content_line(in);
  std::istringstream header(line);
  std::string tag_n, tag_k;
  int n = 0, k = 0;
  if (!(header >> tag_n >> n >> tag_k >> k) || tag_n != "n" || tag_k != "k")
    throw invalid_input("read_partition: expected 'n <n> k <k>' header");
  if (n < 2 || k < 1) throw invalid_input("read_partition: header requires n >= 2 and k >= 1");
  const std::int64_t total = pair_count(n);
  std::vector<int> map(static_cast<std::size_t>(total), -1);
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (std::int64_t row = 0; row < total; ++row) {
    line = next_content_line(in);
    std::istringstream fields(line);
    std::int64_t e = 0;
    int p = 0;
    if (!(fields >> e >> p)) throw invalid_input("read_partition: malformed assignment line");
    if (e < 0 || e >= total || p < 0 || p >= k) throw invalid_input("read_partition: index out of range");
    if (map[static_cast<std::size_t>(e)] != -1) throw invalid_input("read_partition: duplicate edge index");
    map[static_cast<std::size_t>(e)] = p;
    used[static_cast<std::size_t>(p)] = true;
  }
  for (bool u : used)
    if (!u) throw invalid_input("read_partition: header k disagrees with the used part indices");
  return EdgePartition(n, std::move(map));
}

// --- constraint specs ---------------------------------------------------------

json spec_to_json(const ConstraintSpec& spec) {
  return std::visit(
      [&](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Budget>) {
          return json{{"type", "budget"}, {"costs", c.costs}, {"budget", c.budget}};
        } else if constexpr (std::is_same_v<T, LinearSystem>) {
          return json{{"type", "linear"}, {"a", c.a}, {"b", c.b}};
        } else if constexpr (std::is_same_v<T, Box>) {
          return json{{"type", "box"}, {"lo", c.lo}, {"hi", c.hi}};
        } else if constexpr (std::is_same_v<T, Spectral>) {
          json blocks = json::array();
          for (auto [g1, g2] : c.blocks) blocks.push_back(json::array({g1, g2}));
          return json{{"type", "spectral"},
                      {"rho", c.rho},
                      {"connector", c.connector},
                      {"threshold", c.threshold},
                      {"blocks", blocks}};
        } else {
          json members = json::array();
          for (const auto& member : c.members) members.push_back(spec_to_json(member));
          return json{{"type", "intersection"}, {"members", members}};
        }
      },
      spec.node());
}

ConstraintSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw invalid_input("constraint: expected an object with a 'type' tag");
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "budget") {
      return ConstraintSpec::budget(j.at("costs").get<std::vector<double>>(),
                                    j.at("budget").get<double>());
    }
    if (type == "linear") {
      return ConstraintSpec::linear(j.at("a").get<std::vector<std::vector<double>>>(),
                                    j.at("b").get<std::vector<double>>());
    }
    if (type == "box") {
      return ConstraintSpec::box(j.at("lo").get<Profile>(), j.at("hi").get<Profile>());
    }
    if (type == "spectral") {
      std::vector<std::pair<int, int>> blocks;
      for (const auto& b : j.at("blocks")) blocks.emplace_back(b.at(0).get<int>(), b.at(1).get<int>());
      return ConstraintSpec::spectral(j.at("rho").get<std::vector<double>>(),
                                      j.at("connector").get<int>(), std::move(blocks),
                                      j.value("threshold", 1.0));
    }
    if (type == "intersection") {
      std::vector<ConstraintSpec> members;
      for (const auto& m : j.at("members")) members.push_back(spec_from_json(m));
      return ConstraintSpec::intersection(std::move(members));
    }
  } catch (const json::exception& e) {
    throw invalid_input(std::string("constraint: ") + e.what());
  }
  throw invalid_input("constraint: unknown type '" + type + "'");
}

json solution_to_json(const MaxEntSolution& sol) {
  json j;
  j["m_star"] = sol.m_star;
  j["q_star"] = sol.q_star;
  j["duals"] = sol.duals;
  j["objective"] = sol.objective;
  j["status"] = to_string(sol.status);
  j["kkt_residual"] = sol.kkt_residual;
  j["iterations"] = sol.iterations;
  return j;
}

json diagnostics_to_json(const DiagnosticsReport& report) {
  json j;
  j["n"] = report.n;
  j["k"] = report.k;
  j["mu"] = report.mu;
  j["tilde_m"] = report.tilde_m;
  if (report.lambda) j["lambda"] = *report.lambda;
  if (report.resolution) j["resolution"] = *report.resolution;
  j["well_conditioned"] = report.well_conditioned;
  return j;
}

// --- experiment configuration ---------------------------------------------------

namespace {

template <typename T>
T take(const json& j, const char* field, T fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw invalid_input(std::string("config: field '") + field + "' has the wrong type");
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw invalid_input("config: expected a JSON object");
  ExperimentConfig c;
  c.schema = take<int>(j, "schema", 1);
  if (c.schema != 1) throw invalid_input("config: field 'schema' has unsupported value");
  if (!j.contains("n")) throw invalid_input("config: field 'n' is required");
  c.n = take<int>(j, "n", 0);
  if (c.n < 2) throw invalid_input("config: field 'n' must be at least 2");

  if (j.contains("partition")) {
    const json& p = j.at("partition");
    if (!p.is_object()) throw invalid_input("config: field 'partition' must be an object");
    c.partition.source = take<std::string>(p, "source", "balanced");
    c.partition.k = take<int>(p, "k", 1);
    c.partition.path = take<std::string>(p, "path", "");
    c.partition.cost_values = take<std::vector<double>>(p, "values", {});
    c.partition.bin_ratio = take<double>(p, "bin_ratio", 0.5);
    if (c.partition.source != "balanced" && c.partition.source != "file" && c.partition.source != "costs")
      throw invalid_input("config: field 'partition.source' must be balanced, file, or costs");
    if (c.partition.source == "balanced" && c.partition.k < 1)
      throw invalid_input("config: field 'partition.k' must be positive");
    if (c.partition.source == "file" && c.partition.path.empty())
      throw invalid_input("config: field 'partition.path' is required for source=file");
    if (c.partition.source == "costs" && c.partition.path.empty() && c.partition.cost_values.empty())
      throw invalid_input("config: field 'partition.values' or 'partition.path' is required for source=costs");
  }

  if (!j.contains("constraint")) throw invalid_input("config: field 'constraint' is required");
  c.constraint = j.at("constraint");
  spec_from_json(c.constraint);  // validate eagerly

  c.epsilon = take<double>(j, "epsilon", 0.5);
  c.trials = take<std::int64_t>(j, "trials", 100);
  if (c.trials < 0) throw invalid_input("config: field 'trials' must be nonnegative");
  c.seed = take<std::uint64_t>(j, "seed", 0);
  c.strategy = take<std::string>(j, "strategy", "enum");
  if (c.strategy != "enum" && c.strategy != "dp" && c.strategy != "mcmc")
    throw invalid_input("config: field 'strategy' must be enum, dp, or mcmc");
  c.allow_approx = take<bool>(j, "allow_approx", false);
  c.jobs = take<int>(j, "jobs", 1);
  if (c.jobs < 1) throw invalid_input("config: field 'jobs' must be positive");
  c.out_dir = take<std::string>(j, "out", "out");
  c.graph_format = take<std::string>(j, "graph_format", "text");
  if (c.graph_format != "text" && c.graph_format != "binary")
    throw invalid_input("config: field 'graph_format' must be text or binary");
  if (j.contains("caps")) {
    const json& caps = j.at("caps");
    c.profile_cap = take<std::int64_t>(caps, "profiles", c.profile_cap);
    c.graph_cap = take<std::int64_t>(caps, "graphs", c.graph_cap);
    c.dp_cell_cap = take<std::int64_t>(caps, "dp_cells", c.dp_cell_cap);
  }
  if (j.contains("mcmc")) {
    const json& m = j.at("mcmc");
    c.mcmc_burn_in = take<std::int64_t>(m, "burn_in", c.mcmc_burn_in);
    c.mcmc_thinning = take<std::int64_t>(m, "thinning", c.mcmc_thinning);
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json partition{{"source", c.partition.source}};
  if (c.partition.source == "balanced") partition["k"] = c.partition.k;
  if (!c.partition.path.empty()) partition["path"] = c.partition.path;
  if (!c.partition.cost_values.empty()) partition["values"] = c.partition.cost_values;
  if (c.partition.source == "costs") partition["bin_ratio"] = c.partition.bin_ratio;

  return json{{"schema", c.schema},
              {"n", c.n},
              {"partition", partition},
              {"constraint", c.constraint},
              {"epsilon", c.epsilon},
              {"trials", c.trials},
              {"seed", c.seed},
              {"strategy", c.strategy},
              {"allow_approx", c.allow_approx},
              {"jobs", c.jobs},
              {"out", c.out_dir},
              {"graph_format", c.graph_format},
              {"caps", json{{"profiles", c.profile_cap}, {"graphs", c.graph_cap}, {"dp_cells", c.dp_cell_cap}}},
              {"mcmc", json{{"burn_in", c.mcmc_burn_in}, {"thinning", c.mcmc_thinning}}}};
}

std::string canonical_config(const ExperimentConfig& config) {
  // nlohmann objects keep keys sorted, so dump() is canonical. Execution-only
  // fields (worker count, output directory) do not define the experiment and
  // stay out of the hash so reruns with different --jobs/--out byte-match.
  json j = config_to_json(config);
  j.erase("jobs");
  j.erase("out");
  return j.dump();
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = canonical_config(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

EdgePartition build_partition(const ExperimentConfig& config) {
  const auto& p = config.partition;
  if (p.source == "balanced") return EdgePartition::balanced(config.n, p.k);
  if (p.source == "file") {
    std::ifstream in(p.path);
    if (!in) throw invalid_input("config: partition file '" + p.path + "' cannot be opened");
    return read_partition(in);
  }
  std::vector<double> costs = p.cost_values;
  if (costs.empty()) {
    std::ifstream in(p.path);
    if (!in) throw invalid_input("config: cost file '" + p.path + "' cannot be opened");
    double x = 0.0;
    while (in >> x) costs.push_back(x);
  }
  return EdgePartition::from_costs(config.n, costs, p.bin_ratio);
}

ConstraintSpec build_spec(const ExperimentConfig& config) { return spec_from_json(config.constraint); }

ProfileStrategy parse_strategy(const std::string& name) {
  if (name == "enum") return ProfileStrategy::enumeration;
  if (name == "dp") return ProfileStrategy::budget_dp;
  if (name == "mcmc") return ProfileStrategy::mcmc;
  throw invalid_input("config: field 'strategy' must be enum, dp, or mcmc");
}

json output_stamp(const ExperimentConfig& config) {
  return json{{"config_hash", config_hash(config)}, {"seed", config.seed}, {"version", kArtifactVersion}};
}

// --- binary run log -------------------------------------------------------------

namespace {
void write_u32(std::ostream& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((x >> (8 * i)) & 0xFF));
}
void write_u64(std::ostream& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((x >> (8 * i)) & 0xFF));
}
}  // namespace

void write_run_log_header(std::ostream& out, int n, std::int64_t num_edges, std::uint64_t seed,
                          const std::string& hash_hex) {
  out.write("SGRL", 4);
  write_u32(out, 1u);
  write_u64(out, static_cast<std::uint64_t>(n));
  write_u64(out, static_cast<std::uint64_t>(num_edges));
  write_u64(out, seed);
  std::string hex = hash_hex;
  hex.resize(16, '0');
  out.write(hex.data(), 16);
}

void append_run_log_graph(std::ostream& out, const Graph& g) {
  const std::int64_t total = g.num_slots();
  std::vector<unsigned char> bytes(static_cast<std::size_t>((total + 7) / 8), 0);
  for (std::int64_t e = 0; e < total; ++e)
    if (g.has_edge(e)) bytes[static_cast<std::size_t>(e / 8)] |= static_cast<unsigned char>(1u << (e % 8));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace symgraph
