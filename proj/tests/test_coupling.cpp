#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "symgraph/coupling.hpp"
#include "symgraph/oracle.hpp"
#include "test_helpers.hpp"

using namespace symgraph;

namespace {

std::vector<double> draw_uniforms(RandomStream& rng, std::int64_t n) {
  std::vector<double> u(static_cast<std::size_t>(n));
  for (double& x : u) x = rng.next_unit();
  return u;
}

bool is_subset(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_CASE("samp/flip extremes") {
  RandomStream rng(2);
  SUBCASE("empty subset is always nested below") {
    const auto u = draw_uniforms(rng, 20);
    const SampFlipTriple t = couple_samp_flip(20, 0, 0.4, u);
    CHECK(t.x.empty());
    CHECK(t.z_minus.empty());
    CHECK(t.nested);
  }
  SUBCASE("full subset clamps the upper probability") {
    const auto u = draw_uniforms(rng, 20);
    const SampFlipTriple t = couple_samp_flip(20, 20, 0.4, u);
    CHECK(t.p_plus == doctest::Approx(1.0));
    CHECK(t.z_plus.size() == 20);
    CHECK(t.nested);
  }
  SUBCASE("delta outside (0,1) is rejected") {
    const auto u = draw_uniforms(rng, 5);
    CHECK_THROWS_AS(couple_samp_flip(5, 2, 0.0, u), invalid_input);
    CHECK_THROWS_AS(couple_samp_flip(5, 2, 1.0, u), invalid_input);
  }
}

TEST_CASE("nesting equals the count condition on every draw") {
  RandomStream rng(3);
  for (int rep = 0; rep < 2000; ++rep) {
    const std::int64_t n = 1 + rng.next_below(40);
    const std::int64_t m = rng.next_below(n + 1);
    const double delta = 0.05 + 0.9 * rng.next_unit();
    const auto u = draw_uniforms(rng, n);
    const SampFlipTriple t = couple_samp_flip(n, m, delta, u);
    const bool counts = static_cast<std::int64_t>(t.z_minus.size()) <= m &&
                        m <= static_cast<std::int64_t>(t.z_plus.size());
    const bool sets = is_subset(t.z_minus, t.x) && is_subset(t.x, t.z_plus);
    CHECK(t.nested == counts);
    CHECK(t.nested == sets);
    CHECK(static_cast<std::int64_t>(t.x.size()) == m);
  }
}

TEST_CASE("samp/flip failure rate obeys the exponential bound") {
  const std::int64_t universe = 100;
  const std::int64_t m = 50;
  RandomStream rng(41);
  for (double delta : {0.2, 0.3, 0.5}) {
    std::int64_t fails = 0;
    const int trials = 20000;
    for (int rep = 0; rep < trials; ++rep) {
      const auto u = draw_uniforms(rng, universe);
      if (!couple_samp_flip(universe, m, delta, u).nested) ++fails;
    }
    const double bound =
        2.0 * std::exp(-delta * delta * static_cast<double>(m) / (3.0 * (1.0 + delta)));
    CHECK(static_cast<double>(fails) / trials <= bound);
  }
}

TEST_CASE("samp/flip marginals are correct per element") {
  const std::int64_t universe = 60;
  const std::int64_t m = 24;
  const double delta = 0.3;
  RandomStream rng(43);
  const int trials = 40000;
  std::vector<std::int64_t> in_x(universe, 0), in_minus(universe, 0), in_plus(universe, 0);
  double p_minus = 0.0, p_plus = 0.0;
  for (int rep = 0; rep < trials; ++rep) {
    const auto u = draw_uniforms(rng, universe);
    const SampFlipTriple t = couple_samp_flip(universe, m, delta, u);
    p_minus = t.p_minus;
    p_plus = t.p_plus;
    for (std::int64_t i : t.x) in_x[static_cast<std::size_t>(i)] += 1;
    for (std::int64_t i : t.z_minus) in_minus[static_cast<std::size_t>(i)] += 1;
    for (std::int64_t i : t.z_plus) in_plus[static_cast<std::size_t>(i)] += 1;
  }
  const double q = static_cast<double>(m) / universe;
  auto banded = [&](std::int64_t hits, double p) {
    const double sigma = std::sqrt(p * (1.0 - p) / trials);
    return std::abs(static_cast<double>(hits) / trials - p) <= 3.8 * sigma;
  };
  for (std::int64_t i = 0; i < universe; ++i) {
    CHECK(banded(in_x[static_cast<std::size_t>(i)], q));
    CHECK(banded(in_minus[static_cast<std::size_t>(i)], p_minus));
    CHECK(banded(in_plus[static_cast<std::size_t>(i)], p_plus));
  }
}

TEST_CASE("single-part sandwich reduces to the basic coupling") {
  const EdgePartition part = EdgePartition::trivial(4);
  const ConstraintSpec all = ConstraintSpec::box(Profile{0}, Profile{6});
  SandwichCoupler coupler(part, all, 0.5, ProfileStrategy::enumeration);
  CHECK(coupler.solution().q_star[0] == doctest::Approx(0.5));
  RandomStream rng(7);
  std::map<std::int64_t, std::int64_t> profile_hits;
  for (int rep = 0; rep < 5000; ++rep) {
    RandomStream stream = rng.substream(static_cast<std::uint64_t>(rep));
    const CouplingOutcome out = coupler.run(stream);
    CHECK(edge_profile(out.g, part)[0] == out.profile_used[0]);
    profile_hits[out.profile_used[0]] += 1;
  }
  // Binomial(6, 1/2) profile marginal: mean 3.
  double mean = 0.0;
  for (const auto& [v, h] : profile_hits) mean += static_cast<double>(v * h) / 5000.0;
  CHECK(std::abs(mean - 3.0) <= 3.0 * std::sqrt(6.0 * 0.25 / 5000.0));
}

TEST_CASE("upper clamp keeps the complete graph above") {
  // q = 0.9 and eps = 0.5 push (1+eps) q past 1.
  const EdgePartition part = EdgePartition::trivial(5);
  const ConstraintSpec spec = ConstraintSpec::box(Profile{9}, Profile{9});
  SandwichCoupler coupler(part, spec, 0.5, ProfileStrategy::enumeration);
  RandomStream rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    RandomStream stream = rng.substream(static_cast<std::uint64_t>(rep));
    const CouplingOutcome out = coupler.run(stream);
    CHECK(out.g_plus == Graph::complete(5));
    CHECK(out.per_part_holds[0] == 1);  // upper and lower both hold here w.h.p.
  }
}

TEST_CASE("sandwich rate dominates the analytic failure bound on a budget family") {
  // Sizes (10,10) embedded with an inert zero-cost part; bound is vacuous at
  // this scale, the run exercises the full pipeline.
  std::vector<int> map;
  for (int i = 0; i < 10; ++i) map.push_back(0);
  for (int i = 0; i < 10; ++i) map.push_back(1);
  map.push_back(2);
  const EdgePartition part(7, map);
  const ConstraintSpec spec = ConstraintSpec::budget({1.0, 2.0, 0.0}, 12.0);
  RandomStream rng(11);
  const RateEstimate est = empirical_sandwich_rate(part, spec, 0.8, 4000, rng, 2);
  SandwichCoupler coupler(part, spec, 0.8, ProfileStrategy::enumeration);
  const DiagnosticsReport& diag = coupler.diagnostics();
  REQUIRE(diag.lambda.has_value());
  const BoundValue delta = sandwich_delta(0.8, diag.mu, *diag.lambda);
  CHECK(est.rate >= 1.0 - delta.value);
  CHECK(!est.degenerate);
}

TEST_CASE("single trial is degenerate") {
  const EdgePartition part = EdgePartition::trivial(4);
  const ConstraintSpec spec = ConstraintSpec::box(Profile{3}, Profile{3});
  RandomStream rng(5);
  const RateEstimate est = empirical_sandwich_rate(part, spec, 0.5, 1, rng);
  CHECK((est.rate == 0.0 || est.rate == 1.0));
  CHECK(est.ci_halfwidth == 1.0);
  CHECK(est.degenerate);
}

TEST_CASE("holds-rate is pointwise monotone in eps under shared seeds") {
  const EdgePartition part = EdgePartition::trivial(6);
  const ConstraintSpec spec = ConstraintSpec::box(Profile{5}, Profile{5});
  RandomStream rng(17);
  double prev = -1.0;
  for (double eps : {0.2, 0.35, 0.5, 0.65, 0.8}) {
    const RateEstimate est = empirical_sandwich_rate(part, spec, eps, 3000, rng);
    CHECK(est.rate >= prev - 1e-12);
    prev = est.rate;
  }
}

TEST_CASE("loose sandwiches hold almost always") {
  // p = (45), profile fixed at 22, eps = 0.9: both flip probabilities are far
  // from the pinned count.
  const EdgePartition part = EdgePartition::trivial(10);
  const ConstraintSpec spec = ConstraintSpec::box(Profile{22}, Profile{22});
  RandomStream rng(19);
  const RateEstimate est = empirical_sandwich_rate(part, spec, 0.9, 2000, rng);
  CHECK(est.rate >= 0.995);
}

TEST_CASE("middle graph matches the uniform family measure") {
  const EdgePartition part = EdgePartition::trivial(4);
  const ConstraintSpec spec = ConstraintSpec::budget({1.0}, 2.0);
  const ExactSetSummary summary = enumerate_set(part, spec);
  SandwichCoupler coupler(part, spec, 0.5, ProfileStrategy::enumeration);
  RandomStream rng(23);
  const int draws = 50000;
  std::map<std::uint64_t, double> freq;
  for (int rep = 0; rep < draws; ++rep) {
    RandomStream stream = rng.substream(static_cast<std::uint64_t>(rep));
    freq[coupler.run(stream).g.mask()] += 1.0 / draws;
  }
  double tv = 0.0;
  for (std::uint32_t mask : summary.member_masks)
    tv += std::abs(1.0 / static_cast<double>(summary.size) - freq[mask]);
  for (const auto& [mask, p] : freq) {
    bool member = false;
    for (std::uint32_t mm : summary.member_masks) member = member || (mm == mask);
    if (!member) tv += p;
  }
  tv /= 2.0;
  CHECK(tv <= 4.0 * std::sqrt(std::log(static_cast<double>(summary.size)) / draws));
}

TEST_CASE("coupler validates eps and feasibility") {
  const EdgePartition part = EdgePartition::trivial(4);
  RandomStream rng(1);
  CHECK_THROWS_AS(sandwich_sample(part, ConstraintSpec::box(Profile{3}, Profile{3}), 0.0,
                                  ProfileStrategy::enumeration, rng),
                  invalid_input);
  CHECK_THROWS_AS(sandwich_sample(part, ConstraintSpec::box(Profile{3}, Profile{3}), 1.0,
                                  ProfileStrategy::enumeration, rng),
                  invalid_input);
  CHECK_THROWS_AS(sandwich_sample(part, ConstraintSpec::budget({1.0}, -1.0), 0.5,
                                  ProfileStrategy::enumeration, rng),
                  empty_set_error);
}

TEST_CASE("jobs do not change the empirical outcome") {
  const EdgePartition part = EdgePartition::trivial(6);
  const ConstraintSpec spec = ConstraintSpec::budget({1.0}, 9.0);
  RandomStream a(77), b(77);
  const RateEstimate one = empirical_sandwich_rate(part, spec, 0.6, 2000, a, 1);
  const RateEstimate eight = empirical_sandwich_rate(part, spec, 0.6, 2000, b, 8);
  CHECK(one.rate == eight.rate);
}
