#include "symgraph/graphspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "symgraph/errors.hpp"

namespace symgraph {

std::int64_t pair_count(int n) {
  if (n < 2) throw invalid_input("pair_count: need n >= 2");
  return static_cast<std::int64_t>(n) * (n - 1) / 2;
}

std::vector<std::pair<int, int>> enumerate_edges(int n) {
  const std::int64_t total = pair_count(n);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(total));
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  return edges;
}

std::int64_t edge_index(int n, int u, int v) {
  if (u > v) std::swap(u, v);
  if (u < 0 || v >= n || u == v) throw invalid_input("edge_index: invalid vertex pair");
  const std::int64_t un = u;
  return un * n - un * (un + 1) / 2 + (v - u - 1);
}

std::pair<int, int> edge_endpoints(int n, std::int64_t index) {
  if (index < 0 || index >= pair_count(n)) throw invalid_input("edge_endpoints: index out of range");
  std::int64_t rem = index;
  for (int u = 0; u < n - 1; ++u) {
    const std::int64_t row = n - 1 - u;
    if (rem < row) return {u, u + 1 + static_cast<int>(rem)};
    rem -= row;
  }
  throw invalid_input("edge_endpoints: unreachable");
}

EdgePartition::EdgePartition(int n, std::vector<int> part_of) : n_(n), part_of_(std::move(part_of)) {
  const std::int64_t total = pair_count(n);
  if (static_cast<std::int64_t>(part_of_.size()) != total)
    throw invalid_input("EdgePartition: part map must cover all N edges");
  int k = 0;
  for (int p : part_of_) {
    if (p < 0) throw invalid_input("EdgePartition: negative part index");
    k = std::max(k, p + 1);
  }
  if (k == 0) throw invalid_input("EdgePartition: no parts");
  part_sizes_.assign(static_cast<std::size_t>(k), 0);
  parts_.assign(static_cast<std::size_t>(k), {});
  for (std::int64_t e = 0; e < total; ++e) {
    const int p = part_of_[static_cast<std::size_t>(e)];
    part_sizes_[static_cast<std::size_t>(p)] += 1;
    parts_[static_cast<std::size_t>(p)].push_back(e);
  }
  for (std::int64_t size : part_sizes_)
    if (size == 0) throw invalid_input("EdgePartition: every part must be nonempty");
}

EdgePartition EdgePartition::trivial(int n) {
  return EdgePartition(n, std::vector<int>(static_cast<std::size_t>(pair_count(n)), 0));
}

EdgePartition EdgePartition::balanced(int n, int k) {
  const std::int64_t total = pair_count(n);
  if (k < 1 || k > total) throw invalid_input("EdgePartition::balanced: need 1 <= k <= N");
  std::vector<int> map(static_cast<std::size_t>(total));
  // First (total % k) parts get one extra edge.
  const std::int64_t base = total / k;
  const std::int64_t extra = total % k;
  std::int64_t e = 0;
  for (int p = 0; p < k; ++p) {
    const std::int64_t size = base + (p < extra ? 1 : 0);
    for (std::int64_t i = 0; i < size; ++i) map[static_cast<std::size_t>(e++)] = p;
  }
  return EdgePartition(n, std::move(map));
}

EdgePartition EdgePartition::from_costs(int n, std::span<const double> costs, double bin_ratio) {
  const std::int64_t total = pair_count(n);
  if (static_cast<std::int64_t>(costs.size()) != total)
    throw invalid_input("from_costs: costs must have length N");
  if (!(bin_ratio > 0.0)) throw invalid_input("from_costs: bin_ratio must be positive");
  for (double c : costs)
    if (!(c >= 0.0) || !std::isfinite(c)) throw invalid_input("from_costs: costs must be finite and nonnegative");

  double cmin = std::numeric_limits<double>::infinity();
  for (double c : costs)
    if (c > 0.0) cmin = std::min(cmin, c);

  // Bin key: -1 for zero-cost edges, otherwise the geometric bin index anchored at cmin.
  const double log_ratio = std::log1p(bin_ratio);
  auto bin_of = [&](double c) -> std::int64_t {
    if (c == 0.0) return -1;
    std::int64_t i = static_cast<std::int64_t>(std::floor(std::log(c / cmin) / log_ratio));
    // Repair floating rounding so the half-open bins are exact.
    while (c < cmin * std::pow(1.0 + bin_ratio, static_cast<double>(i))) --i;
    while (c >= cmin * std::pow(1.0 + bin_ratio, static_cast<double>(i + 1))) ++i;
    return i;
  };

  std::map<std::int64_t, int> compact;  // ascending bin key -> part index
  std::vector<std::int64_t> keys(static_cast<std::size_t>(total));
  for (std::int64_t e = 0; e < total; ++e) {
    keys[static_cast<std::size_t>(e)] = bin_of(costs[static_cast<std::size_t>(e)]);
    compact.emplace(keys[static_cast<std::size_t>(e)], 0);
  }
  int next = 0;
  for (auto& [key, part] : compact) part = next++;
  std::vector<int> map(static_cast<std::size_t>(total));
  for (std::int64_t e = 0; e < total; ++e)
    map[static_cast<std::size_t>(e)] = compact[keys[static_cast<std::size_t>(e)]];
  return EdgePartition(n, std::move(map));
}

Graph::Graph(int n) : n_(n), bits_(static_cast<std::size_t>(pair_count(n)), 0) {}

Graph Graph::complete(int n) {
  Graph g(n);
  std::fill(g.bits_.begin(), g.bits_.end(), 1);
  return g;
}

Graph Graph::from_edges(int n, std::span<const std::pair<int, int>> edges) {
  Graph g(n);
  for (auto [u, v] : edges) {
    const std::int64_t e = edge_index(n, u, v);
    if (g.bits_[static_cast<std::size_t>(e)]) throw invalid_input("Graph::from_edges: duplicate edge");
    g.bits_[static_cast<std::size_t>(e)] = 1;
  }
  return g;
}

Graph Graph::from_mask(int n, std::uint64_t mask) {
  Graph g(n);
  if (g.num_slots() > 64) throw invalid_input("Graph::from_mask: N exceeds 64");
  for (std::int64_t e = 0; e < g.num_slots(); ++e)
    g.bits_[static_cast<std::size_t>(e)] = (mask >> e) & 1u;
  return g;
}

std::int64_t Graph::edge_count() const {
  return std::accumulate(bits_.begin(), bits_.end(), std::int64_t{0});
}

Graph Graph::complement() const {
  Graph g(n_);
  for (std::size_t i = 0; i < bits_.size(); ++i) g.bits_[i] = bits_[i] ? 0 : 1;
  return g;
}

std::uint64_t Graph::mask() const {
  if (num_slots() > 64) throw invalid_input("Graph::mask: N exceeds 64");
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) m |= (std::uint64_t{1} << i);
  return m;
}

Profile edge_profile(const Graph& g, const EdgePartition& part) {
  if (g.n() != part.n()) throw invalid_input("edge_profile: graph and partition disagree on n");
  Profile counts(static_cast<std::size_t>(part.k()), 0);
  for (std::int64_t e = 0; e < g.num_slots(); ++e)
    if (g.has_edge(e)) counts[static_cast<std::size_t>(part.part_of(e))] += 1;
  return counts;
}

namespace {
template <typename T>
std::vector<double> density_impl(const std::vector<T>& m, const EdgePartition& part) {
  if (static_cast<int>(m.size()) != part.k()) throw invalid_input("density_profile: dimension mismatch");
  std::vector<double> a(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double p = static_cast<double>(part.part_sizes()[i]);
    const double v = static_cast<double>(m[i]);
    if (v < 0.0 || v > p) throw invalid_input("density_profile: counts outside [0, p_i]");
    a[i] = v / p;
  }
  return a;
}
}  // namespace

std::vector<double> density_profile(const Profile& m, const EdgePartition& part) {
  return density_impl(m, part);
}
std::vector<double> density_profile(const RealProfile& m, const EdgePartition& part) {
  return density_impl(m, part);
}

Graph permute_within_parts(const Graph& g, const EdgePartition& part, RandomStream& rng) {
  if (g.n() != part.n()) throw invalid_input("permute_within_parts: dimension mismatch");
  Graph out(g.n());
  for (const auto& edges : part.parts()) {
    std::vector<std::int64_t> image(edges);
    for (std::size_t j = image.size(); j > 1; --j) {
      const std::int64_t r = rng.next_below(static_cast<std::int64_t>(j));
      std::swap(image[j - 1], image[static_cast<std::size_t>(r)]);
    }
    for (std::size_t j = 0; j < edges.size(); ++j)
      if (g.has_edge(edges[j])) out.set_edge(image[j], true);
  }
  return out;
}

}  // namespace symgraph
