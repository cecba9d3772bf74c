#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "symgraph/random.hpp"

namespace symgraph {

/// Integer edge counts per part; real-valued profiles hold optimizers and densities.
using Profile = std::vector<std::int64_t>;
using RealProfile = std::vector<double>;

/// Number of potential edges N = n(n-1)/2.
std::int64_t pair_count(int n);

/// All unordered pairs (u, v), u < v, in lexicographic order. This order is the
/// canonical edge indexing used throughout.
std::vector<std::pair<int, int>> enumerate_edges(int n);

/// Index of edge {u, v} in the canonical order.
std::int64_t edge_index(int n, int u, int v);

/// Endpoints of the edge at a canonical index.
std::pair<int, int> edge_endpoints(int n, std::int64_t index);

/// Partition of the N potential edges into k nonempty parts. Immutable.
class EdgePartition {
 public:
  EdgePartition(int n, std::vector<int> part_of);

  /// Single part holding every edge.
  static EdgePartition trivial(int n);

  /// k contiguous runs of the canonical edge order, sizes differing by at most one.
  static EdgePartition balanced(int n, int k);

  /// Geometric cost binning: edges with cost in [c_min (1+delta)^i, c_min (1+delta)^{i+1})
  /// share a part; zero-cost edges (if any) get a dedicated first part; empty bins are
  /// dropped and part indices compacted in ascending cost order.
  static EdgePartition from_costs(int n, std::span<const double> costs, double bin_ratio);

  int n() const { return n_; }
  int k() const { return static_cast<int>(part_sizes_.size()); }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(part_of_.size()); }
  int part_of(std::int64_t edge) const { return part_of_[static_cast<std::size_t>(edge)]; }
  const std::vector<int>& part_map() const { return part_of_; }
  const std::vector<std::int64_t>& part_sizes() const { return part_sizes_; }
  /// Edge indices of each part, ascending.
  const std::vector<std::vector<std::int64_t>>& parts() const { return parts_; }

  bool operator==(const EdgePartition& other) const {
    return n_ == other.n_ && part_of_ == other.part_of_;
  }

 private:
  int n_;
  std::vector<int> part_of_;
  std::vector<std::int64_t> part_sizes_;
  std::vector<std::vector<std::int64_t>> parts_;
};

/// Simple undirected graph on n labeled vertices, stored as a dense edge-membership
/// indicator over the canonical edge indices.
class Graph {
 public:
  explicit Graph(int n);

  static Graph complete(int n);
  static Graph from_edges(int n, std::span<const std::pair<int, int>> edges);
  /// Bit i of mask = membership of canonical edge i; requires N <= 64.
  static Graph from_mask(int n, std::uint64_t mask);

  int n() const { return n_; }
  std::int64_t num_slots() const { return static_cast<std::int64_t>(bits_.size()); }
  bool has_edge(std::int64_t edge) const { return bits_[static_cast<std::size_t>(edge)] != 0; }
  void set_edge(std::int64_t edge, bool present) {
    bits_[static_cast<std::size_t>(edge)] = present ? 1 : 0;
  }
  std::int64_t edge_count() const;
  Graph complement() const;
  /// Edge mask for N <= 64 (oracle-scale helper).
  std::uint64_t mask() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool operator==(const Graph& other) const { return n_ == other.n_ && bits_ == other.bits_; }

 private:
  int n_;
  std::vector<std::uint8_t> bits_;
};

/// counts_i = number of edges of g in part i.
Profile edge_profile(const Graph& g, const EdgePartition& part);

/// a_i = m_i / p_i.
std::vector<double> density_profile(const Profile& m, const EdgePartition& part);
std::vector<double> density_profile(const RealProfile& m, const EdgePartition& part);

/// Relabels edges by an independent uniform permutation within each part.
Graph permute_within_parts(const Graph& g, const EdgePartition& part, RandomStream& rng);

}  // namespace symgraph
