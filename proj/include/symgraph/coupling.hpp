#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "symgraph/analysis.hpp"
#include "symgraph/graphspace.hpp"
#include "symgraph/maxent.hpp"
#include "symgraph/sampler.hpp"

namespace symgraph {

/// One realized Samp/Flip coupling over a finite universe: x is the uniform
/// m-subset (the m smallest shared uniforms, ties by index), z_minus/z_plus the
/// Bernoulli subsets at the lower/upper probabilities.
struct SampFlipTriple {
  std::vector<std::int64_t> x;
  std::vector<std::int64_t> z_minus;
  std::vector<std::int64_t> z_plus;
  bool nested = false;  // z_minus subseteq x subseteq z_plus
  double p_minus = 0.0;
  double p_plus = 0.0;
};

/// Shared-uniform coupling at explicit probabilities.
SampFlipTriple couple_with_probabilities(std::int64_t m, double p_minus, double p_plus,
                                         std::span<const double> uniforms);

/// Coupling at the count-anchored probabilities p_pm = m / ((1 -+ delta) N),
/// the upper one clamped to 1; delta must lie in (0, 1).
SampFlipTriple couple_samp_flip(std::int64_t universe, std::int64_t m, double delta,
                                std::span<const double> uniforms);

struct CouplingOutcome {
  Graph g_minus;
  Graph g;
  Graph g_plus;
  bool holds = false;
  std::vector<std::uint8_t> per_part_holds;
  Profile profile_used;
};

/// Assembles the three-graph coupling for a constrained family: one uniform
/// drives the profile draw (inverse CDF under exact strategies), one uniform per
/// edge drives every per-part Samp/Flip coupling at probabilities (1 +- eps) q_i
/// clamped to [0, 1].
class SandwichCoupler {
 public:
  SandwichCoupler(const EdgePartition& part, const ConstraintSpec& spec, double eps,
                  ProfileStrategy strategy, const SamplerCaps& caps = {});

  /// Thread-safe for exact strategies; the MCMC chain is sequential state.
  CouplingOutcome run(RandomStream& rng) const;

  const MaxEntSolution& solution() const { return solution_; }
  const DiagnosticsReport& diagnostics() const { return diagnostics_; }
  bool marginal_exact() const { return strategy_ != ProfileStrategy::mcmc; }
  double epsilon() const { return eps_; }

 private:
  const EdgePartition* part_;
  double eps_;
  ProfileStrategy strategy_;
  MaxEntSolution solution_;
  DiagnosticsReport diagnostics_;
  std::optional<ProfileDistribution> enum_dist_;
  std::optional<BudgetDpSampler> dp_;
  std::unique_ptr<McmcProfileSampler> mcmc_;
  std::vector<double> q_minus_;
  std::vector<double> q_plus_;
};

CouplingOutcome sandwich_sample(const EdgePartition& part, const ConstraintSpec& spec, double eps,
                                ProfileStrategy strategy, RandomStream& rng,
                                const SamplerCaps& caps = {});

struct RateEstimate {
  double rate = 0.0;
  double ci_halfwidth = 0.0;  // 99% normal approximation; 1.0 when degenerate
  bool degenerate = false;
  std::int64_t trials = 0;
};

/// Fraction of trials whose sandwich holds, on independent derived streams
/// (substream per trial index), deterministically reproducible for any jobs count.
RateEstimate empirical_sandwich_rate(const EdgePartition& part, const ConstraintSpec& spec,
                                     double eps, std::int64_t trials, RandomStream& rng,
                                     int jobs = 1, ProfileStrategy strategy = ProfileStrategy::enumeration,
                                     const SamplerCaps& caps = {});

}  // namespace symgraph
