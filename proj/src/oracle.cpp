#include "symgraph/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "symgraph/errors.hpp"
#include "symgraph/maxent.hpp"

namespace symgraph {

namespace {

double log_sum_exp(const std::vector<double>& xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Iterate all integer profiles of the box in lexicographic order (last
// coordinate slowest would be column-major; we advance coordinate 0 fastest and
// sort afterwards where order matters).
template <typename Fn>
void for_each_profile(const EdgePartition& part, Fn&& fn) {
  Profile v(static_cast<std::size_t>(part.k()), 0);
  for (;;) {
    fn(v);
    std::size_t pos = 0;
    while (pos < v.size() && v[pos] == part.part_sizes()[pos]) {
      v[pos] = 0;
      ++pos;
    }
    if (pos == v.size()) break;
    v[pos] += 1;
  }
}

bool mul_saturating(std::uint64_t& acc, std::uint64_t factor) {
  if (factor != 0 && acc > UINT64_MAX / factor) {
    acc = UINT64_MAX;
    return false;
  }
  acc *= factor;
  return true;
}

std::uint64_t binomial_u64(std::int64_t p, std::int64_t m, bool& exact) {
  // Products here stay within uint64 for oracle-scale parts; saturate otherwise.
  if (m < 0 || m > p) return 0;
  m = std::min(m, p - m);
  unsigned __int128 num = 1;
  for (std::int64_t i = 1; i <= m; ++i) {
    num = num * static_cast<unsigned __int128>(p - m + i) / static_cast<unsigned __int128>(i);
    if (num > static_cast<unsigned __int128>(UINT64_MAX)) {
      exact = false;
      return UINT64_MAX;
    }
  }
  return static_cast<std::uint64_t>(num);
}

void finalize_profiles(ExactSetSummary& summary) {
  std::sort(summary.profiles.begin(), summary.profiles.end(),
            [](const ProfileCount& a, const ProfileCount& b) { return a.v < b.v; });
  std::vector<double> logs;
  logs.reserve(summary.profiles.size());
  for (const auto& pc : summary.profiles) logs.push_back(pc.log_count);
  summary.log_size = log_sum_exp(logs);
  for (auto& pc : summary.profiles) pc.prob = std::exp(pc.log_count - summary.log_size);
  summary.empty = summary.profiles.empty();
  if (summary.empty) summary.log_size = -std::numeric_limits<double>::infinity();
}

}  // namespace

ExactSetSummary enumerate_set(const EdgePartition& part, const ConstraintSpec& spec,
                              const OracleOptions& options) {
  ExactSetSummary summary;
  const std::int64_t total = part.num_edges();

  std::int64_t space = 1;
  bool space_ok = true;
  for (std::int64_t p : part.part_sizes()) {
    if (space > options.profile_cap / (p + 1) + 1) {
      space_ok = false;
      break;
    }
    space *= p + 1;
  }
  if (space_ok && space > options.profile_cap) space_ok = false;
  if (!space_ok)
    throw capacity_error("enumerate_set: profile space exceeds cap of " +
                         std::to_string(options.profile_cap));

  // Feasible profiles with exact counts.
  std::vector<std::vector<double>> log_tables;
  for (std::int64_t p : part.part_sizes()) log_tables.push_back(log_binomial_table(p));
  summary.count_exact = true;
  for_each_profile(part, [&](const Profile& v) {
    if (!contains(spec, v, part)) return;
    ProfileCount pc;
    pc.v = v;
    pc.log_count = 0.0;
    std::uint64_t count = 1;
    bool exact = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      pc.log_count += log_tables[i][static_cast<std::size_t>(v[i])];
      const std::uint64_t c = binomial_u64(part.part_sizes()[i], v[i], exact);
      if (!mul_saturating(count, c)) exact = false;
    }
    pc.count = count;
    if (!exact) summary.count_exact = false;
    summary.profiles.push_back(std::move(pc));
  });

  summary.size = 0;
  for (const auto& pc : summary.profiles) {
    if (summary.size > UINT64_MAX - pc.count) {
      summary.size = UINT64_MAX;
      summary.count_exact = false;
      break;
    }
    summary.size += pc.count;
  }
  finalize_profiles(summary);

  // Explicit member list when the graph space is small enough.
  if (total <= 24 && (std::int64_t{1} << total) <= options.graph_cap) {
    summary.explicit_mode = true;
    std::vector<std::uint32_t> part_masks(static_cast<std::size_t>(part.k()), 0);
    for (std::int64_t e = 0; e < total; ++e)
      part_masks[static_cast<std::size_t>(part.part_of(e))] |= (std::uint32_t{1} << e);
    std::map<Profile, bool> memo;
    const std::uint32_t limit = (std::uint32_t{1} << total) - 1;
    Profile v(static_cast<std::size_t>(part.k()));
    for (std::uint32_t mask = 0;; ++mask) {
      for (std::size_t i = 0; i < part_masks.size(); ++i)
        v[i] = __builtin_popcount(mask & part_masks[i]);
      auto [it, inserted] = memo.emplace(v, false);
      if (inserted) it->second = contains(spec, v, part);
      if (it->second) summary.member_masks.push_back(mask);
      if (mask == limit) break;
    }
    // Cross-check the per-profile product counts against direct counting.
    std::map<Profile, std::uint64_t> direct;
    for (std::uint32_t mask : summary.member_masks) {
      for (std::size_t i = 0; i < part_masks.size(); ++i)
        v[i] = __builtin_popcount(mask & part_masks[i]);
      direct[v] += 1;
    }
    if (direct.size() != summary.profiles.size())
      throw invalid_state("enumerate_set: profile support mismatch between modes");
    for (const auto& pc : summary.profiles) {
      auto it = direct.find(pc.v);
      if (it == direct.end() || it->second != pc.count)
        throw invalid_state("enumerate_set: product count disagrees with direct counting");
    }
  }
  return summary;
}

ExactSetSummary summarize_profiles(const EdgePartition& part, const std::vector<Profile>& profiles) {
  ExactSetSummary summary;
  std::set<Profile> dedup(profiles.begin(), profiles.end());
  std::vector<std::vector<double>> log_tables;
  for (std::int64_t p : part.part_sizes()) log_tables.push_back(log_binomial_table(p));
  summary.count_exact = true;
  for (const auto& v : dedup) {
    if (static_cast<int>(v.size()) != part.k())
      throw invalid_input("summarize_profiles: dimension mismatch");
    ProfileCount pc;
    pc.v = v;
    std::uint64_t count = 1;
    bool exact = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 0 || v[i] > part.part_sizes()[i])
        throw invalid_input("summarize_profiles: profile outside [0, p_i]");
      pc.log_count += log_tables[i][static_cast<std::size_t>(v[i])];
      const std::uint64_t c = binomial_u64(part.part_sizes()[i], v[i], exact);
      if (!mul_saturating(count, c)) exact = false;
    }
    pc.count = count;
    if (!exact) summary.count_exact = false;
    summary.profiles.push_back(std::move(pc));
  }
  summary.size = 0;
  for (const auto& pc : summary.profiles) summary.size += pc.count;
  finalize_profiles(summary);
  return summary;
}

std::vector<std::pair<Profile, double>> exact_profile_distribution(const ExactSetSummary& summary) {
  if (summary.empty) throw invalid_input("exact_profile_distribution: empty set");
  std::vector<std::pair<Profile, double>> out;
  out.reserve(summary.profiles.size());
  for (const auto& pc : summary.profiles) {
    if (summary.count_exact) {
      const double direct = static_cast<double>(pc.count) / static_cast<double>(summary.size);
      if (std::abs(direct - pc.prob) > 1e-12)
        throw invalid_state("exact_profile_distribution: entropy weights disagree with counts");
    }
    out.emplace_back(pc.v, pc.prob);
  }
  return out;
}

double total_variation(std::span<const double> d1, std::span<const double> d2) {
  if (d1.size() != d2.size()) throw invalid_input("total_variation: supports differ");
  double s = 0.0;
  for (std::size_t i = 0; i < d1.size(); ++i) s += std::abs(d1[i] - d2[i]);
  return s / 2.0;
}

bool factorization_holds(const ExactSetSummary& summary, const EdgePartition& part,
                         const EventFamily& family, const Profile& v) {
  if (!summary.explicit_mode)
    throw invalid_input("factorization_holds: explicit enumeration required");
  const int k = part.k();
  if (static_cast<int>(family.include.size()) != k || static_cast<int>(family.exclude.size()) != k)
    throw invalid_input("factorization_holds: family must cover every part");
  for (int i = 0; i < k; ++i) {
    std::set<std::int64_t> inc(family.include[i].begin(), family.include[i].end());
    for (std::int64_t e : family.exclude[i])
      if (inc.count(e)) throw invalid_input("factorization_holds: include and exclude sets overlap");
    for (std::int64_t e : family.include[i])
      if (part.part_of(e) != i) throw invalid_input("factorization_holds: event edge outside its part");
    for (std::int64_t e : family.exclude[i])
      if (part.part_of(e) != i) throw invalid_input("factorization_holds: event edge outside its part");
  }

  std::vector<std::uint32_t> inc_mask(static_cast<std::size_t>(k), 0);
  std::vector<std::uint32_t> exc_mask(static_cast<std::size_t>(k), 0);
  for (int i = 0; i < k; ++i) {
    for (std::int64_t e : family.include[i]) inc_mask[static_cast<std::size_t>(i)] |= (std::uint32_t{1} << e);
    for (std::int64_t e : family.exclude[i]) exc_mask[static_cast<std::size_t>(i)] |= (std::uint32_t{1} << e);
  }
  std::vector<std::uint32_t> part_masks(static_cast<std::size_t>(k), 0);
  for (std::int64_t e = 0; e < part.num_edges(); ++e)
    part_masks[static_cast<std::size_t>(part.part_of(e))] |= (std::uint32_t{1} << e);

  std::uint64_t cnt_v = 0, cnt_all = 0;
  std::vector<std::uint64_t> cnt_single(static_cast<std::size_t>(k), 0);
  for (std::uint32_t mask : summary.member_masks) {
    bool profile_match = true;
    for (int i = 0; i < k && profile_match; ++i)
      profile_match = (__builtin_popcount(mask & part_masks[static_cast<std::size_t>(i)]) ==
                       static_cast<int>(v[static_cast<std::size_t>(i)]));
    if (!profile_match) continue;
    cnt_v += 1;
    bool all = true;
    for (int i = 0; i < k; ++i) {
      const std::size_t s = static_cast<std::size_t>(i);
      const bool ok = ((mask & inc_mask[s]) == inc_mask[s]) && ((mask & exc_mask[s]) == 0);
      if (ok) cnt_single[s] += 1;
      all = all && ok;
    }
    if (all) cnt_all += 1;
  }
  if (cnt_v == 0) return true;  // nothing to condition on

  // P(all | v) = prod_i P(A_i | v_i)  <=>  cnt_all * cnt_v^{k-1} = prod_i cnt_i.
  unsigned __int128 lhs = cnt_all;
  for (int i = 1; i < k; ++i) lhs *= cnt_v;
  unsigned __int128 rhs = 1;
  for (int i = 0; i < k; ++i) rhs *= cnt_single[static_cast<std::size_t>(i)];
  return lhs == rhs;
}

bool verify_conditional_factorization(const ExactSetSummary& summary, const EdgePartition& part,
                                      int families, RandomStream& rng) {
  if (!summary.explicit_mode)
    throw invalid_input("verify_conditional_factorization: explicit enumeration required");
  if (summary.empty) return true;
  const int k = part.k();
  for (int f = 0; f < families; ++f) {
    // Disjoint include/exclude edges drawn by a partial shuffle per part.
    EventFamily family;
    family.include.resize(static_cast<std::size_t>(k));
    family.exclude.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      const auto& edges = part.parts()[static_cast<std::size_t>(i)];
      std::vector<std::int64_t> pool(edges);
      const std::int64_t max_pick = std::min<std::int64_t>(4, static_cast<std::int64_t>(pool.size()));
      const std::int64_t n_inc = rng.next_below(max_pick + 1);
      const std::int64_t n_exc = rng.next_below(max_pick - n_inc + 1);
      for (std::int64_t j = 0; j < n_inc + n_exc; ++j) {
        const std::int64_t r = rng.next_below(static_cast<std::int64_t>(pool.size()) - j);
        std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(j + r)]);
      }
      family.include[static_cast<std::size_t>(i)].assign(pool.begin(), pool.begin() + n_inc);
      family.exclude[static_cast<std::size_t>(i)].assign(pool.begin() + n_inc,
                                                         pool.begin() + n_inc + n_exc);
    }
    const auto& pick =
        summary.profiles[static_cast<std::size_t>(rng.next_below(static_cast<std::int64_t>(summary.profiles.size())))];
    if (!factorization_holds(summary, part, family, pick.v)) return false;
  }
  return true;
}

ProfileSpaceSize profile_space_size(const EdgePartition& part) {
  ProfileSpaceSize out;
  out.value = 1;
  for (std::int64_t p : part.part_sizes())
    if (!mul_saturating(out.value, static_cast<std::uint64_t>(p + 1))) out.exact = false;
  double log_space = 0.0;
  for (std::int64_t p : part.part_sizes()) log_space += std::log(static_cast<double>(p + 1));
  out.bound_holds = log_space <= 2.0 * part.k() * std::log(static_cast<double>(part.n())) + 1e-9;
  return out;
}

double entropy_gap_full_space(const EdgePartition& part) {
  double gap = static_cast<double>(part.num_edges()) * std::log(2.0);
  for (std::int64_t p : part.part_sizes()) gap -= log_binomial(p, p / 2);
  return gap;
}

}  // namespace symgraph
