#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "symgraph/graphspace.hpp"

namespace symgraph {

/// A * m <= b componentwise; A is ell x k.
struct LinearSystem {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
};

/// sum_i costs_i * m_i <= budget; costs nonnegative.
struct Budget {
  std::vector<double> costs;
  double budget = 0.0;
};

/// lo_i <= m_i <= hi_i; validated against part sizes at use.
struct Box {
  Profile lo;
  Profile hi;
};

/// Branching-matrix norm condition over group-pair blocks. The partition must be
/// exactly the group-pair partition: one part per unordered pair (g1 <= g2) of the
/// ell groups, k = ell(ell+1)/2. Containment holds when the spectral norm of the
/// branching matrix over non-connector groups is strictly below the threshold.
struct Spectral {
  std::vector<double> rho;                     // group fractions, positive, sum 1
  int connector = 0;                           // group excluded from the branching matrix
  double threshold = 1.0;
  std::vector<std::pair<int, int>> blocks;     // per part: its group pair (g1 <= g2)
};

class ConstraintSpec;

struct Intersection {
  std::vector<ConstraintSpec> members;
};

/// Declarative symmetric constraint on edge profiles (tagged union).
class ConstraintSpec {
 public:
  using Node = std::variant<LinearSystem, Budget, Box, Spectral, Intersection>;

  static ConstraintSpec linear(std::vector<std::vector<double>> a, std::vector<double> b);
  static ConstraintSpec budget(std::vector<double> costs, double budget);
  static ConstraintSpec box(Profile lo, Profile hi);
  static ConstraintSpec spectral(std::vector<double> rho, int connector,
                                 std::vector<std::pair<int, int>> blocks, double threshold = 1.0);
  static ConstraintSpec intersection(std::vector<ConstraintSpec> members);

  const Node& node() const { return *node_; }
  template <typename T>
  const T* get_if() const { return std::get_if<T>(node_.get()); }

 private:
  explicit ConstraintSpec(Node node);
  std::shared_ptr<const Node> node_;
};

/// True iff the profile satisfies every condition of the spec. The spectral
/// condition is strict (< threshold) with no tolerance.
bool contains(const ConstraintSpec& spec, const Profile& m, const EdgePartition& part);
bool contains(const ConstraintSpec& spec, const RealProfile& m, const EdgePartition& part);

/// A constraint bound to a partition, with the implied per-coordinate box
/// [0, p_i]. Emptiness at desk scale is decided by enumeration.
struct FeasibleRegion {
  ConstraintSpec spec;
  EdgePartition partition;

  bool contains(const Profile& m) const;
  /// All feasible integer profiles, lexicographic; the profile space must not
  /// exceed `cap`.
  std::vector<Profile> enumerate_profiles(std::int64_t cap = 10'000'000) const;
  bool empty(std::int64_t cap = 10'000'000) const;
};

/// Signed infeasibility measure: <= 0 iff every non-strict condition holds and
/// < 0 iff strict ones do. Used by greedy repair and feasibility probes.
double violation(const ConstraintSpec& spec, const RealProfile& m, const EdgePartition& part);

/// T_ij = m_ij / (n^2 rho_i) for groups i, j != connector, from the symmetric
/// ell x ell matrix of per-block edge counts.
std::vector<std::vector<double>> branching_matrix(const std::vector<std::vector<double>>& block_counts,
                                                  const std::vector<double>& rho, int connector, int n);

/// Branching matrix assembled from an edge profile through the spec's block map.
std::vector<std::vector<double>> branching_matrix(const Spectral& spec, const RealProfile& m, int n);

/// Maximum singular value by power iteration on T^T T with a deterministic start
/// vector, to relative tolerance 1e-10.
double spectral_norm(const std::vector<std::vector<double>>& t);

/// Whether every integer point of Conv(feasible) is itself feasible. Exact for
/// k <= 2 (integer hulls); for k >= 3 decided by an away-step Frank-Wolfe
/// membership test with documented tolerances.
bool profile_set_convex(const std::vector<Profile>& feasible);

/// Enumerates the integer profiles of the box, filters by the spec, and runs the
/// hull check above. The profile space must not exceed `cap`.
bool verify_convexity(const ConstraintSpec& spec, const EdgePartition& part,
                      std::int64_t cap = 10'000'000);

}  // namespace symgraph
