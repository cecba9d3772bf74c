#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "symgraph/constraints.hpp"
#include "symgraph/graphspace.hpp"
#include "symgraph/random.hpp"

namespace symgraph {

enum class ProfileStrategy { enumeration, budget_dp, mcmc };

std::string to_string(ProfileStrategy s);

struct SamplerCaps {
  std::int64_t profile_cap = 10'000'000;
  std::int64_t dp_cell_cap = 20'000'000;
};

/// Exact distribution over feasible profiles, P(v) proportional to exp(Ent(v)),
/// materialized by enumeration. Draws are inverse-CDF with a single uniform.
class ProfileDistribution {
 public:
  static ProfileDistribution enumerate(const EdgePartition& part, const ConstraintSpec& spec,
                                       const SamplerCaps& caps = {});

  const std::vector<Profile>& support() const { return support_; }
  const std::vector<double>& log_weights() const { return log_weights_; }
  double log_z() const { return log_z_; }
  double prob(std::size_t index) const;
  const Profile& draw(RandomStream& rng) const;

 private:
  std::vector<Profile> support_;
  std::vector<double> log_weights_;  // Ent(v)
  std::vector<double> cumulative_;
  double log_z_ = 0.0;
};

/// Exact profile sampler for a single budget constraint with integer costs.
/// Rational costs are pre-scaled by their least common denominator up to 1e6.
/// The forward table counts weighted suffixes per remaining budget; a draw is
/// the conditional inverse-CDF walk, consuming exactly one uniform.
class BudgetDpSampler {
 public:
  BudgetDpSampler(const EdgePartition& part, const Budget& budget, const SamplerCaps& caps = {});

  Profile draw(RandomStream& rng) const;
  double log_z() const { return log_z_; }
  /// log C(p_i, v_i) summed, for feasible v; -inf otherwise.
  double log_weight(const Profile& v) const;
  std::int64_t scaled_budget() const { return scaled_budget_; }
  const std::vector<std::int64_t>& scaled_costs() const { return scaled_costs_; }

 private:
  const EdgePartition* part_;
  std::vector<std::int64_t> scaled_costs_;
  std::int64_t scaled_budget_ = 0;
  std::vector<std::vector<double>> suffix_;      // suffix_[i][r]: log weight of parts i.. with budget r
  std::vector<std::vector<double>> log_tables_;  // per part: v -> log C(p_i, v)
  double log_z_ = 0.0;
};

struct McmcOptions {
  std::int64_t burn_in = 100000;
  std::int64_t thinning = 0;  // 0 -> k * max_i p_i
};

/// Metropolis chain on the profile lattice: pick a part uniformly, propose
/// +/- 1, accept with min(1, exp(delta Ent)); infeasible moves are rejected.
/// Approximate: draws are labeled accordingly by callers.
class McmcProfileSampler {
 public:
  McmcProfileSampler(const EdgePartition& part, const ConstraintSpec& spec, Profile initial_state,
                     const McmcOptions& options, RandomStream rng);

  Profile draw();
  double acceptance_rate() const;
  /// Geweke-style z-score comparing early and late segments of the Ent series.
  double geweke_z() const;
  const Profile& state() const { return state_; }

 private:
  void step();

  const EdgePartition* part_;
  ConstraintSpec spec_;
  McmcOptions options_;
  RandomStream rng_;
  Profile state_;
  std::vector<std::vector<double>> log_tables_;
  double state_ent_ = 0.0;
  std::int64_t steps_ = 0;
  std::int64_t accepted_ = 0;
  bool burned_in_ = false;
  std::vector<double> ent_series_;
};

/// Rounds m* coordinatewise and repairs into feasibility by greedy violation
/// descent with a small ring search fallback.
Profile feasible_rounding(const RealProfile& m_star, const ConstraintSpec& spec,
                          const EdgePartition& part);

/// One profile with probability proportional to exp(Ent(v)) over the feasible set.
Profile sample_profile(const EdgePartition& part, const ConstraintSpec& spec,
                       ProfileStrategy strategy, RandomStream& rng, const SamplerCaps& caps = {});

/// Independent uniform v_i-subset of each part (partial shuffle).
Graph sample_within_parts(const Profile& v, const EdgePartition& part, RandomStream& rng);

/// Two-stage sampler: exact uniform over the family for exact strategies.
Graph sample_uniform(const EdgePartition& part, const ConstraintSpec& spec,
                     ProfileStrategy strategy, RandomStream& rng, const SamplerCaps& caps = {});

/// Product measure G(n, Q): each edge independently with probability Q_uv.
/// q is the row-major n x n matrix.
Graph sample_product(std::span<const double> q, int n, RandomStream& rng);

}  // namespace symgraph
