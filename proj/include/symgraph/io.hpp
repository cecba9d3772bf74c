#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "symgraph/analysis.hpp"
#include "symgraph/constraints.hpp"
#include "symgraph/graphspace.hpp"
#include "symgraph/maxent.hpp"
#include "symgraph/sampler.hpp"

namespace symgraph {

inline constexpr const char* kArtifactVersion = "0.1.0";

// --- text formats -----------------------------------------------------------
// Graph: "n <n>" then one "u v" line per edge, ascending lexicographic.
// Partition: "n <n> k <k>" then N lines "edge_index part_index".
// Lines starting with '#' are ignored by both readers.

void write_graph(std::ostream& out, const Graph& g);
Graph read_graph(std::istream& in);
std::optional<Graph> read_next_graph(std::istream& in);  // for concatenated streams

void write_partition(std::ostream& out, const EdgePartition& part);
EdgePartition read_partition(std::istream& in);

// --- JSON forms --------------------------------------------------------------

nlohmann::json spec_to_json(const ConstraintSpec& spec);
ConstraintSpec spec_from_json(const nlohmann::json& j);

nlohmann::json solution_to_json(const MaxEntSolution& sol);
nlohmann::json diagnostics_to_json(const DiagnosticsReport& report);

// --- experiment configuration -------------------------------------------------

struct PartitionConfig {
  std::string source = "balanced";  // balanced | file | costs
  int k = 1;                         // balanced
  std::string path;                  // file / costs
  std::vector<double> cost_values;   // costs, inline alternative to path
  double bin_ratio = 0.5;            // costs
};

struct ExperimentConfig {
  int schema = 1;
  int n = 0;
  PartitionConfig partition;
  nlohmann::json constraint;  // tagged-union spec, kept verbatim
  double epsilon = 0.5;
  std::int64_t trials = 100;
  std::uint64_t seed = 0;
  std::string strategy = "enum";  // enum | dp | mcmc
  bool allow_approx = false;
  int jobs = 1;
  std::string out_dir = "out";
  std::string graph_format = "text";  // text | binary
  std::int64_t profile_cap = 10'000'000;
  std::int64_t graph_cap = std::int64_t{1} << 24;
  std::int64_t dp_cell_cap = 20'000'000;
  std::int64_t mcmc_burn_in = 100000;
  std::int64_t mcmc_thinning = 0;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Canonical serialization (sorted keys, defaults filled) and its FNV-1a hash.
std::string canonical_config(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

EdgePartition build_partition(const ExperimentConfig& config);
ConstraintSpec build_spec(const ExperimentConfig& config);
ProfileStrategy parse_strategy(const std::string& name);

/// Stamp shared by every output file.
nlohmann::json output_stamp(const ExperimentConfig& config);

// --- binary run log -----------------------------------------------------------
// Little-endian header: magic "SGRL", u32 version, u64 n, u64 N, u64 seed,
// 16-byte config-hash hex; then one ceil(N/8)-byte bitmap per draw.

void write_run_log_header(std::ostream& out, int n, std::int64_t num_edges, std::uint64_t seed,
                          const std::string& hash_hex);
void append_run_log_graph(std::ostream& out, const Graph& g);

}  // namespace symgraph
