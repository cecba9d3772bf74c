#include "symgraph/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "symgraph/errors.hpp"
#include "symgraph/maxent.hpp"

namespace symgraph {

std::string to_string(ProfileStrategy s) {
  switch (s) {
    case ProfileStrategy::enumeration: return "enumeration";
    case ProfileStrategy::budget_dp: return "budget-dp";
    case ProfileStrategy::mcmc: return "mcmc";
  }
  return "unknown";
}

ProfileDistribution ProfileDistribution::enumerate(const EdgePartition& part,
                                                   const ConstraintSpec& spec,
                                                   const SamplerCaps& caps) {
  std::int64_t space = 1;
  for (std::int64_t p : part.part_sizes()) {
    if (space > caps.profile_cap / (p + 1) + 1)
      throw capacity_error("ProfileDistribution: profile space exceeds cap of " +
                           std::to_string(caps.profile_cap));
    space *= p + 1;
  }
  if (space > caps.profile_cap)
    throw capacity_error("ProfileDistribution: profile space exceeds cap of " +
                         std::to_string(caps.profile_cap));

  std::vector<std::vector<double>> tables;
  for (std::int64_t p : part.part_sizes()) tables.push_back(log_binomial_table(p));

  ProfileDistribution dist;
  Profile v(static_cast<std::size_t>(part.k()), 0);
  for (;;) {
    if (contains(spec, v, part)) {
      double w = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) w += tables[i][static_cast<std::size_t>(v[i])];
      dist.support_.push_back(v);
      dist.log_weights_.push_back(w);
    }
    std::size_t pos = 0;
    while (pos < v.size() && v[pos] == part.part_sizes()[pos]) {
      v[pos] = 0;
      ++pos;
    }
    if (pos == v.size()) break;
    v[pos] += 1;
  }
  if (dist.support_.empty()) throw empty_set_error("ProfileDistribution: constraint admits no profile");

  const double mx = *std::max_element(dist.log_weights_.begin(), dist.log_weights_.end());
  double z = 0.0;
  for (double w : dist.log_weights_) z += std::exp(w - mx);
  dist.log_z_ = mx + std::log(z);
  dist.cumulative_.reserve(dist.log_weights_.size());
  double acc = 0.0;
  for (double w : dist.log_weights_) {
    acc += std::exp(w - dist.log_z_);
    dist.cumulative_.push_back(acc);
  }
  dist.cumulative_.back() = 1.0;
  return dist;
}

double ProfileDistribution::prob(std::size_t index) const {
  return std::exp(log_weights_[index] - log_z_);
}

const Profile& ProfileDistribution::draw(RandomStream& rng) const {
  const double u = rng.next_unit();
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t idx = std::min<std::size_t>(
      static_cast<std::size_t>(it - cumulative_.begin()), support_.size() - 1);
  return support_[idx];
}

namespace {

// Smallest q <= limit with q*c integral (to tolerance) for every cost, via
// continued-fraction denominators.
std::int64_t common_denominator(const std::vector<double>& costs, double budget, std::int64_t limit) {
  // Absolute tolerance: genuinely rational inputs land within double rounding
  // of an integer multiple, irrational ones never get that close for q <= 1e6.
  constexpr double kIntTol = 1e-9;
  auto denom_of = [&](double x) -> std::int64_t {
    if (std::abs(x - std::llround(x)) <= kIntTol) return 1;
    // Continued fraction expansion of the fractional part.
    double frac = x;
    std::int64_t p0 = 1, q0 = 0, p1 = std::llround(std::floor(frac)), q1 = 1;
    double rem = frac - std::floor(frac);
    for (int it = 0; it < 48 && rem > 1e-12; ++it) {
      rem = 1.0 / rem;
      const double a = std::floor(rem);
      if (a > 2e6) break;
      const std::int64_t ai = static_cast<std::int64_t>(a);
      const std::int64_t p2 = ai * p1 + p0;
      const std::int64_t q2 = ai * q1 + q0;
      p0 = p1; q0 = q1; p1 = p2; q1 = q2;
      if (q1 > limit) return -1;
      if (std::abs(x * static_cast<double>(q1) - std::llround(x * static_cast<double>(q1))) <= kIntTol)
        return q1;
      rem -= a;
    }
    return -1;
  };
  std::int64_t lcm = 1;
  auto fold = [&](double x) -> bool {
    const std::int64_t d = denom_of(x);
    if (d < 0) return false;
    const std::int64_t g = std::gcd(lcm, d);
    if (lcm / g > limit / d) return false;
    lcm = lcm / g * d;
    return lcm <= limit;
  };
  for (double c : costs)
    if (!fold(c)) return -1;
  (void)budget;  // the budget itself is floored after scaling
  return lcm;
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace

BudgetDpSampler::BudgetDpSampler(const EdgePartition& part, const Budget& budget,
                                 const SamplerCaps& caps)
    : part_(&part) {
  const auto& p = part.part_sizes();
  if (budget.costs.size() != p.size()) throw invalid_input("BudgetDpSampler: dimension mismatch");
  if (budget.budget < 0.0) throw empty_set_error("BudgetDpSampler: negative budget admits no profile");

  const std::int64_t q = common_denominator(budget.costs, budget.budget, 1'000'000);
  if (q < 0)
    throw invalid_input("BudgetDpSampler: costs are not integral and no common denominator <= 1e6 exists");
  scaled_costs_.resize(p.size());
  double max_cost = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    scaled_costs_[i] = std::llround(budget.costs[i] * static_cast<double>(q));
    max_cost += static_cast<double>(scaled_costs_[i]) * static_cast<double>(p[i]);
  }
  scaled_budget_ = static_cast<std::int64_t>(std::floor(budget.budget * static_cast<double>(q) + 1e-9));
  scaled_budget_ = std::min(scaled_budget_, static_cast<std::int64_t>(max_cost));

  const std::int64_t cells = (scaled_budget_ + 1) * static_cast<std::int64_t>(p.size() + 1);
  if (cells > caps.dp_cell_cap)
    throw capacity_error("BudgetDpSampler: DP table exceeds cap of " + std::to_string(caps.dp_cell_cap) +
                         " cells");

  for (std::int64_t pi : p) log_tables_.push_back(log_binomial_table(pi));

  const std::size_t k = p.size();
  const std::size_t cols = static_cast<std::size_t>(scaled_budget_) + 1;
  suffix_.assign(k + 1, std::vector<double>(cols, 0.0));  // log 1 = 0 for the empty suffix
  for (std::size_t i = k; i-- > 0;) {
    const std::int64_t c = scaled_costs_[i];
    for (std::size_t r = 0; r < cols; ++r) {
      double acc = -std::numeric_limits<double>::infinity();
      const std::int64_t vmax =
          (c == 0) ? p[i] : std::min<std::int64_t>(p[i], static_cast<std::int64_t>(r) / c);
      for (std::int64_t v = 0; v <= vmax; ++v) {
        const std::size_t rest = r - static_cast<std::size_t>(v * c);
        acc = log_add(acc, log_tables_[i][static_cast<std::size_t>(v)] + suffix_[i + 1][rest]);
      }
      suffix_[i][r] = acc;
    }
  }
  log_z_ = suffix_[0][cols - 1];
  if (log_z_ == -std::numeric_limits<double>::infinity())
    throw empty_set_error("BudgetDpSampler: constraint admits no profile");
}

Profile BudgetDpSampler::draw(RandomStream& rng) const {
  const auto& p = part_->part_sizes();
  const std::size_t k = p.size();
  Profile out(k, 0);
  std::int64_t remaining = scaled_budget_;
  // Conditional inverse-CDF in lexicographic part order with one uniform,
  // rescaled through each coordinate.
  double u = rng.next_unit();
  for (std::size_t i = 0; i < k; ++i) {
    const std::int64_t c = scaled_costs_[i];
    const double denom = suffix_[i][static_cast<std::size_t>(remaining)];
    const std::int64_t vmax = (c == 0) ? p[i] : std::min<std::int64_t>(p[i], remaining / c);
    double lo = 0.0;
    std::int64_t chosen = vmax;
    double chosen_lo = 0.0, chosen_hi = 1.0;
    for (std::int64_t v = 0; v <= vmax; ++v) {
      const std::size_t rest = static_cast<std::size_t>(remaining - v * c);
      const double pv =
          std::exp(log_tables_[i][static_cast<std::size_t>(v)] + suffix_[i + 1][rest] - denom);
      const double hi = (v == vmax) ? 1.0 : lo + pv;
      if (u < hi || v == vmax) {
        chosen = v;
        chosen_lo = lo;
        chosen_hi = hi;
        break;
      }
      lo = hi;
    }
    out[i] = chosen;
    remaining -= chosen * c;
    const double width = std::max(chosen_hi - chosen_lo, 1e-300);
    u = std::clamp((u - chosen_lo) / width, 0.0, 1.0 - 1e-16);
  }
  return out;
}

double BudgetDpSampler::log_weight(const Profile& v) const {
  const auto& p = part_->part_sizes();
  if (v.size() != p.size()) throw invalid_input("BudgetDpSampler: dimension mismatch");
  std::int64_t cost = 0;
  double w = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0 || v[i] > p[i]) throw invalid_input("BudgetDpSampler: profile outside [0, p_i]");
    cost += v[i] * scaled_costs_[i];
    w += log_tables_[i][static_cast<std::size_t>(v[i])];
  }
  if (cost > scaled_budget_) return -std::numeric_limits<double>::infinity();
  return w;
}

McmcProfileSampler::McmcProfileSampler(const EdgePartition& part, const ConstraintSpec& spec,
                                       Profile initial_state, const McmcOptions& options,
                                       RandomStream rng)
    : part_(&part), spec_(spec), options_(options), rng_(rng), state_(std::move(initial_state)) {
  if (!contains(spec_, state_, part)) throw invalid_input("McmcProfileSampler: infeasible initial state");
  for (std::int64_t p : part.part_sizes()) log_tables_.push_back(log_binomial_table(p));
  if (options_.thinning <= 0) {
    const std::int64_t pmax = *std::max_element(part.part_sizes().begin(), part.part_sizes().end());
    options_.thinning = static_cast<std::int64_t>(part.k()) * pmax;
  }
  state_ent_ = 0.0;
  for (std::size_t i = 0; i < state_.size(); ++i)
    state_ent_ += log_tables_[i][static_cast<std::size_t>(state_[i])];
}

void McmcProfileSampler::step() {
  steps_ += 1;
  const std::size_t i = static_cast<std::size_t>(rng_.next_below(part_->k()));
  const std::int64_t delta = rng_.next_below(2) == 0 ? -1 : 1;
  const double u = rng_.next_unit();
  Profile proposal = state_;
  proposal[i] += delta;
  if (proposal[i] < 0 || proposal[i] > part_->part_sizes()[i]) return;
  if (!contains(spec_, proposal, *part_)) return;
  const double ent_new = state_ent_ - log_tables_[i][static_cast<std::size_t>(state_[i])] +
                         log_tables_[i][static_cast<std::size_t>(proposal[i])];
  if (std::log(std::max(u, 1e-300)) <= ent_new - state_ent_) {
    state_ = std::move(proposal);
    state_ent_ = ent_new;
    accepted_ += 1;
  }
}

Profile McmcProfileSampler::draw() {
  if (!burned_in_) {
    for (std::int64_t s = 0; s < options_.burn_in; ++s) step();
    burned_in_ = true;
  } else {
    for (std::int64_t s = 0; s < options_.thinning; ++s) step();
  }
  ent_series_.push_back(state_ent_);
  return state_;
}

double McmcProfileSampler::acceptance_rate() const {
  return steps_ == 0 ? 0.0 : static_cast<double>(accepted_) / static_cast<double>(steps_);
}

double McmcProfileSampler::geweke_z() const {
  const std::size_t n = ent_series_.size();
  if (n < 20) return 0.0;
  const std::size_t na = n / 10;
  const std::size_t nb = n / 2;
  auto moments = [&](std::size_t lo, std::size_t hi) {
    double mean = 0.0;
    for (std::size_t i = lo; i < hi; ++i) mean += ent_series_[i];
    mean /= static_cast<double>(hi - lo);
    double var = 0.0;
    for (std::size_t i = lo; i < hi; ++i) var += (ent_series_[i] - mean) * (ent_series_[i] - mean);
    var /= std::max<std::size_t>(1, hi - lo - 1);
    return std::pair<double, double>{mean, var};
  };
  const auto [ma, va] = moments(0, na);
  const auto [mb, vb] = moments(n - nb, n);
  const double se = std::sqrt(va / static_cast<double>(na) + vb / static_cast<double>(nb));
  return se == 0.0 ? 0.0 : (ma - mb) / se;
}

Profile feasible_rounding(const RealProfile& m_star, const ConstraintSpec& spec,
                          const EdgePartition& part) {
  const auto& p = part.part_sizes();
  if (m_star.size() != p.size()) throw invalid_input("feasible_rounding: dimension mismatch");
  Profile x(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    x[i] = std::clamp<std::int64_t>(std::llround(m_star[i]), 0, p[i]);
  if (contains(spec, x, part)) return x;

  // Greedy descent on the violation measure over +/-1 moves.
  RealProfile xr(x.begin(), x.end());
  double best = violation(spec, xr, part);
  for (int step = 0; step < 100000; ++step) {
    double best_next = best;
    std::size_t best_i = 0;
    std::int64_t best_d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::int64_t d : {std::int64_t{-1}, std::int64_t{1}}) {
        const std::int64_t cand = x[i] + d;
        if (cand < 0 || cand > p[i]) continue;
        xr[i] = static_cast<double>(cand);
        const double viol = violation(spec, xr, part);
        if (viol < best_next - 1e-15) {
          best_next = viol;
          best_i = i;
          best_d = d;
        }
        xr[i] = static_cast<double>(x[i]);
      }
    }
    if (best_d == 0) break;
    x[best_i] += best_d;
    xr[best_i] = static_cast<double>(x[best_i]);
    best = best_next;
    if (contains(spec, x, part)) return x;
  }

  // Ring search around the rounded point as a last resort.
  for (std::int64_t radius = 1; radius <= 3; ++radius) {
    Profile probe = x;
    std::function<bool(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t left) -> bool {
      if (i == probe.size()) return left == 0 && contains(spec, probe, part);
      for (std::int64_t d = -left; d <= left; ++d) {
        const std::int64_t cand = x[i] + d;
        if (cand < 0 || cand > p[i]) continue;
        probe[i] = cand;
        if (rec(i + 1, left - std::abs(d))) return true;
      }
      probe[i] = x[i];
      return false;
    };
    if (rec(0, radius)) return probe;
  }
  throw empty_set_error("feasible_rounding: no feasible integer profile near m*");
}

Profile sample_profile(const EdgePartition& part, const ConstraintSpec& spec,
                       ProfileStrategy strategy, RandomStream& rng, const SamplerCaps& caps) {
  switch (strategy) {
    case ProfileStrategy::enumeration:
      return ProfileDistribution::enumerate(part, spec, caps).draw(rng);
    case ProfileStrategy::budget_dp: {
      const auto* budget = spec.get_if<Budget>();
      if (!budget) throw invalid_input("sample_profile: budget-dp requires a single budget constraint");
      return BudgetDpSampler(part, *budget, caps).draw(rng);
    }
    case ProfileStrategy::mcmc: {
      MaxEntSolution sol = maximize_entropy(part, spec);
      if (sol.status == SolveStatus::infeasible)
        throw empty_set_error("sample_profile: constraint admits no profile");
      McmcProfileSampler chain(part, spec, feasible_rounding(sol.m_star, spec, part), {},
                               rng.substream(0x6D636D63u));
      return chain.draw();
    }
  }
  throw invalid_input("sample_profile: unknown strategy");
}

Graph sample_within_parts(const Profile& v, const EdgePartition& part, RandomStream& rng) {
  if (static_cast<int>(v.size()) != part.k()) throw invalid_input("sample_within_parts: dimension mismatch");
  Graph g(part.n());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0 || v[i] > part.part_sizes()[i])
      throw invalid_input("sample_within_parts: profile outside [0, p_i]");
    std::vector<std::int64_t> pool(part.parts()[i]);
    for (std::int64_t j = 0; j < v[i]; ++j) {
      const std::int64_t r = rng.next_below(static_cast<std::int64_t>(pool.size()) - j);
      std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(j + r)]);
      g.set_edge(pool[static_cast<std::size_t>(j)], true);
    }
  }
  return g;
}

Graph sample_uniform(const EdgePartition& part, const ConstraintSpec& spec,
                     ProfileStrategy strategy, RandomStream& rng, const SamplerCaps& caps) {
  const Profile v = sample_profile(part, spec, strategy, rng, caps);
  return sample_within_parts(v, part, rng);
}

Graph sample_product(std::span<const double> q, int n, RandomStream& rng) {
  if (static_cast<std::int64_t>(q.size()) != static_cast<std::int64_t>(n) * n)
    throw invalid_input("sample_product: matrix must be n x n");
  Graph g(n);
  for (std::int64_t e = 0; e < g.num_slots(); ++e) {
    const auto [u, v] = edge_endpoints(n, e);
    const double quv = q[static_cast<std::size_t>(u) * n + v];
    const double qvu = q[static_cast<std::size_t>(v) * n + u];
    if (!(quv >= 0.0) || !(quv <= 1.0) || quv != qvu)
      throw invalid_input("sample_product: entries must be symmetric probabilities");
    if (rng.next_unit() < quv) g.set_edge(e, true);
  }
  for (int d = 0; d < n; ++d)
    if (q[static_cast<std::size_t>(d) * n + d] != 0.0)
      throw invalid_input("sample_product: diagonal must be zero");
  return g;
}

}  // namespace symgraph
