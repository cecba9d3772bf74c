#pragma once

#include <cstdint>
#include <vector>

#include "symgraph/constraints.hpp"
#include "symgraph/graphspace.hpp"
#include "symgraph/random.hpp"

namespace symgraph {

struct ProfileCount {
  Profile v;
  std::uint64_t count = 0;  // exact when count_exact
  double log_count = 0.0;
  double prob = 0.0;
};

/// Exhaustive description of a constrained graph family at oracle scale.
struct ExactSetSummary {
  bool explicit_mode = false;
  std::vector<std::uint32_t> member_masks;  // explicit mode only (N <= 24)
  std::uint64_t size = 0;                   // exact when count_exact
  bool count_exact = true;
  double log_size = 0.0;
  bool empty = true;
  std::vector<ProfileCount> profiles;       // feasible profiles, lexicographic
};

struct OracleOptions {
  std::int64_t graph_cap = std::int64_t{1} << 24;
  std::int64_t profile_cap = 10'000'000;
};

/// Enumerates the family either explicitly (all 2^N graphs, N <= 24) or in
/// profile-counting mode (count(v) = prod_i C(p_i, v_i) over feasible v).
ExactSetSummary enumerate_set(const EdgePartition& part, const ConstraintSpec& spec,
                              const OracleOptions& options = {});

/// Counts-only summary of an explicit profile list (testing aid for sets that
/// no declarative variant expresses).
ExactSetSummary summarize_profiles(const EdgePartition& part, const std::vector<Profile>& profiles);

/// P(v) = exp(Ent(v)) / sum_w exp(Ent(w)); cross-checked against direct counts
/// in explicit mode to 1e-12.
std::vector<std::pair<Profile, double>> exact_profile_distribution(const ExactSetSummary& summary);

/// (1/2) sum |d1 - d2| over a common index universe.
double total_variation(std::span<const double> d1, std::span<const double> d2);

/// Per-part event: edges that must be present and edges that must be absent.
struct EventFamily {
  std::vector<std::vector<std::int64_t>> include;  // I_i per part
  std::vector<std::vector<std::int64_t>> exclude;  // O_i per part
};

/// Exact check that conditional on every profile, per-part events are
/// independent (counting identity on the explicit member list). Event families
/// are drawn from the given stream; malformed families (overlapping
/// include/exclude) are rejected with invalid_input.
bool verify_conditional_factorization(const ExactSetSummary& summary, const EdgePartition& part,
                                      int families, RandomStream& rng);

/// Checks one explicit family; exposed for targeted tests.
bool factorization_holds(const ExactSetSummary& summary, const EdgePartition& part,
                         const EventFamily& family, const Profile& v);

struct ProfileSpaceSize {
  std::uint64_t value = 0;  // saturates at UINT64_MAX on overflow
  bool exact = true;
  bool bound_holds = false;  // value <= n^{2k}
};

ProfileSpaceSize profile_space_size(const EdgePartition& part);

/// ln|H_N| - Ent(floor(p/2)) = N ln 2 - sum_i ln C(p_i, floor(p_i / 2)).
double entropy_gap_full_space(const EdgePartition& part);

}  // namespace symgraph
