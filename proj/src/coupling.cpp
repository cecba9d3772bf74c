#include "symgraph/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "symgraph/errors.hpp"

namespace symgraph {

SampFlipTriple couple_with_probabilities(std::int64_t m, double p_minus, double p_plus,
                                         std::span<const double> uniforms) {
  const std::int64_t n = static_cast<std::int64_t>(uniforms.size());
  if (m < 0 || m > n) throw invalid_input("couple_with_probabilities: need 0 <= m <= N");
  if (!(p_minus >= 0.0) || !(p_minus <= 1.0) || !(p_plus >= 0.0) || !(p_plus <= 1.0))
    throw invalid_input("couple_with_probabilities: probabilities must lie in [0, 1]");

  SampFlipTriple out;
  out.p_minus = p_minus;
  out.p_plus = p_plus;

  // x = the m smallest uniforms, ties broken by index.
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    const double ua = uniforms[static_cast<std::size_t>(a)];
    const double ub = uniforms[static_cast<std::size_t>(b)];
    return ua != ub ? ua < ub : a < b;
  });
  out.x.assign(order.begin(), order.begin() + m);
  std::sort(out.x.begin(), out.x.end());

  for (std::int64_t i = 0; i < n; ++i) {
    const double u = uniforms[static_cast<std::size_t>(i)];
    if (u <= p_minus) out.z_minus.push_back(i);
    if (u <= p_plus) out.z_plus.push_back(i);
  }
  out.nested = static_cast<std::int64_t>(out.z_minus.size()) <= m &&
               m <= static_cast<std::int64_t>(out.z_plus.size());
  return out;
}

SampFlipTriple couple_samp_flip(std::int64_t universe, std::int64_t m, double delta,
                                std::span<const double> uniforms) {
  if (!(delta > 0.0) || !(delta < 1.0)) throw invalid_input("couple_samp_flip: delta must lie in (0, 1)");
  if (static_cast<std::int64_t>(uniforms.size()) != universe)
    throw invalid_input("couple_samp_flip: need one uniform per element");
  const double nd = static_cast<double>(universe);
  const double p_minus = static_cast<double>(m) / ((1.0 + delta) * nd);
  const double p_plus = std::min(1.0, static_cast<double>(m) / ((1.0 - delta) * nd));
  return couple_with_probabilities(m, p_minus, p_plus, uniforms);
}

SandwichCoupler::SandwichCoupler(const EdgePartition& part, const ConstraintSpec& spec, double eps,
                                 ProfileStrategy strategy, const SamplerCaps& caps)
    : part_(&part), eps_(eps), strategy_(strategy) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw invalid_input("SandwichCoupler: eps must lie in (0, 1)");
  solution_ = maximize_entropy(part, spec);
  if (solution_.status == SolveStatus::infeasible)
    throw empty_set_error("SandwichCoupler: constraint admits no profile");
  if (solution_.status != SolveStatus::converged)
    throw invalid_state("SandwichCoupler: entropy solve did not converge");
  diagnostics_ = diagnose(solution_.m_star, part);

  switch (strategy) {
    case ProfileStrategy::enumeration:
      enum_dist_ = ProfileDistribution::enumerate(part, spec, caps);
      break;
    case ProfileStrategy::budget_dp: {
      const auto* budget = spec.get_if<Budget>();
      if (!budget) throw invalid_input("SandwichCoupler: budget-dp requires a single budget constraint");
      dp_.emplace(part, *budget, caps);
      break;
    }
    case ProfileStrategy::mcmc:
      mcmc_ = std::make_unique<McmcProfileSampler>(part, spec,
                                                   feasible_rounding(solution_.m_star, spec, part),
                                                   McmcOptions{}, RandomStream(0x6D636D63u));
      break;
  }

  q_minus_.resize(solution_.q_star.size());
  q_plus_.resize(solution_.q_star.size());
  for (std::size_t i = 0; i < solution_.q_star.size(); ++i) {
    q_minus_[i] = std::clamp((1.0 - eps) * solution_.q_star[i], 0.0, 1.0);
    q_plus_[i] = std::clamp((1.0 + eps) * solution_.q_star[i], 0.0, 1.0);
  }
}

CouplingOutcome SandwichCoupler::run(RandomStream& rng) const {
  const int n = part_->n();
  const std::int64_t total = part_->num_edges();

  // One uniform for the profile, one per edge; the profile uniform comes first.
  Profile v;
  if (enum_dist_) {
    v = enum_dist_->draw(rng);
  } else if (dp_) {
    v = dp_->draw(rng);
  } else {
    (void)rng.next_unit();  // keep the edge uniforms aligned across strategies
    v = mcmc_->draw();
  }
  std::vector<double> uniforms(static_cast<std::size_t>(total));
  for (std::int64_t e = 0; e < total; ++e) uniforms[static_cast<std::size_t>(e)] = rng.next_unit();

  CouplingOutcome out{Graph(n), Graph(n), Graph(n), true,
                      std::vector<std::uint8_t>(static_cast<std::size_t>(part_->k()), 0), v};
  for (int i = 0; i < part_->k(); ++i) {
    const auto& edges = part_->parts()[static_cast<std::size_t>(i)];
    std::vector<double> local(edges.size());
    for (std::size_t j = 0; j < edges.size(); ++j)
      local[j] = uniforms[static_cast<std::size_t>(edges[j])];
    const SampFlipTriple triple = couple_with_probabilities(
        v[static_cast<std::size_t>(i)], q_minus_[static_cast<std::size_t>(i)],
        q_plus_[static_cast<std::size_t>(i)], local);
    for (std::int64_t j : triple.x) out.g.set_edge(edges[static_cast<std::size_t>(j)], true);
    for (std::int64_t j : triple.z_minus) out.g_minus.set_edge(edges[static_cast<std::size_t>(j)], true);
    for (std::int64_t j : triple.z_plus) out.g_plus.set_edge(edges[static_cast<std::size_t>(j)], true);
    out.per_part_holds[static_cast<std::size_t>(i)] = triple.nested ? 1 : 0;
    out.holds = out.holds && triple.nested;
  }
  return out;
}

CouplingOutcome sandwich_sample(const EdgePartition& part, const ConstraintSpec& spec, double eps,
                                ProfileStrategy strategy, RandomStream& rng, const SamplerCaps& caps) {
  SandwichCoupler coupler(part, spec, eps, strategy, caps);
  return coupler.run(rng);
}

RateEstimate empirical_sandwich_rate(const EdgePartition& part, const ConstraintSpec& spec,
                                     double eps, std::int64_t trials, RandomStream& rng, int jobs,
                                     ProfileStrategy strategy, const SamplerCaps& caps) {
  if (trials < 1) throw invalid_input("empirical_sandwich_rate: need at least one trial");
  SandwichCoupler coupler(part, spec, eps, strategy, caps);

  std::vector<std::uint8_t> holds(static_cast<std::size_t>(trials), 0);
  auto run_range = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t t = lo; t < hi; ++t) {
      RandomStream stream = rng.substream(static_cast<std::uint64_t>(t));
      holds[static_cast<std::size_t>(t)] = coupler.run(stream).holds ? 1 : 0;
    }
  };

  // The MCMC chain is sequential state; exact strategies shard over a shared coupler.
  if (jobs <= 1 || strategy == ProfileStrategy::mcmc || trials < 2 * jobs) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (trials + jobs - 1) / jobs;
    for (int w = 1; w < jobs; ++w) {
      const std::int64_t lo = w * chunk;
      const std::int64_t hi = std::min<std::int64_t>(trials, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&run_range, lo, hi] { run_range(lo, hi); });
    }
    run_range(0, std::min<std::int64_t>(trials, chunk));
    for (auto& th : pool) th.join();
  }

  RateEstimate out;
  out.trials = trials;
  std::int64_t good = 0;
  for (std::uint8_t h : holds) good += h;
  out.rate = static_cast<double>(good) / static_cast<double>(trials);
  if (trials < 2) {
    out.degenerate = true;
    out.ci_halfwidth = 1.0;
  } else {
    out.ci_halfwidth = 2.5758293035489004 * std::sqrt(out.rate * (1.0 - out.rate) / static_cast<double>(trials));
  }
  return out;
}

}  // namespace symgraph
