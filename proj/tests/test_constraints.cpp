#include <cmath>

#include "doctest.h"
#include "symgraph/constraints.hpp"
#include "test_helpers.hpp"

using namespace symgraph;
using symgraph::testing::feasible_profiles;
using symgraph::testing::group_pair_partition;

namespace {
const std::vector<std::pair<int, int>> kTwoGroupPairs{{0, 0}, {0, 1}, {1, 1}};
}

TEST_CASE("budget containment") {
  const EdgePartition part = EdgePartition::balanced(4, 2);  // sizes (3,3)
  const ConstraintSpec spec = ConstraintSpec::budget({1.0, 2.0}, 3.0);
  CHECK(contains(spec, Profile{1, 1}, part));
  CHECK(!contains(spec, Profile{2, 1}, part));
  CHECK_THROWS_AS(contains(spec, Profile{1}, part), invalid_input);
  CHECK_THROWS_AS(contains(spec, Profile{5, 0}, part), invalid_input);
}

TEST_CASE("budget is the one-row linear system") {
  const EdgePartition part = EdgePartition::balanced(5, 2);  // sizes (5,5)
  const std::vector<double> costs{1.5, 2.0};
  const double budget = 7.0;
  const ConstraintSpec b = ConstraintSpec::budget(costs, budget);
  const ConstraintSpec l = ConstraintSpec::linear({costs}, {budget});
  for (std::int64_t v0 = 0; v0 <= 5; ++v0)
    for (std::int64_t v1 = 0; v1 <= 5; ++v1)
      CHECK(contains(b, Profile{v0, v1}, part) == contains(l, Profile{v0, v1}, part));
}

TEST_CASE("budget containment is downward monotone") {
  const EdgePartition part = EdgePartition::balanced(5, 2);
  const ConstraintSpec spec = ConstraintSpec::budget({2.0, 3.0}, 11.0);
  for (const Profile& m : feasible_profiles(part, spec))
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      Profile lower = m;
      lower[i] -= 1;
      CHECK(contains(spec, lower, part));
    }
}

TEST_CASE("intersection containment is the conjunction") {
  const EdgePartition part = EdgePartition::balanced(5, 2);
  const ConstraintSpec a = ConstraintSpec::budget({1.0, 1.0}, 6.0);
  const ConstraintSpec b = ConstraintSpec::box(Profile{0, 1}, Profile{4, 5});
  const ConstraintSpec both = ConstraintSpec::intersection({a, b});
  for (std::int64_t v0 = 0; v0 <= 5; ++v0)
    for (std::int64_t v1 = 0; v1 <= 5; ++v1) {
      const Profile m{v0, v1};
      CHECK(contains(both, m, part) == (contains(a, m, part) && contains(b, m, part)));
    }
}

TEST_CASE("branching matrix formula") {
  SUBCASE("zero counts give the zero matrix") {
    const auto t = branching_matrix({{0, 0}, {0, 0}}, {0.5, 0.5}, 1, 10);
    CHECK(t.size() == 1);
    CHECK(t[0][0] == 0.0);
  }
  SUBCASE("three groups, connector last") {
    const std::vector<std::vector<double>> counts{{800, 600, 0}, {600, 450, 0}, {0, 0, 0}};
    const auto t = branching_matrix(counts, {0.4, 0.3, 0.3}, 2, 100);
    CHECK(t[0][0] == doctest::Approx(0.2));
    CHECK(t[0][1] == doctest::Approx(0.15));
    CHECK(t[1][0] == doctest::Approx(0.2));
    CHECK(t[1][1] == doctest::Approx(0.15));
  }
  SUBCASE("linearity in the counts") {
    const std::vector<std::vector<double>> counts{{800, 600, 0}, {600, 450, 0}, {0, 0, 0}};
    const auto t1 = branching_matrix(counts, {0.4, 0.3, 0.3}, 2, 100);
    std::vector<std::vector<double>> tripled = counts;
    for (auto& row : tripled)
      for (double& x : row) x *= 3.0;
    const auto t3 = branching_matrix(tripled, {0.4, 0.3, 0.3}, 2, 100);
    for (std::size_t i = 0; i < t1.size(); ++i)
      for (std::size_t j = 0; j < t1.size(); ++j) CHECK(t3[i][j] == doctest::Approx(3.0 * t1[i][j]));
  }
  CHECK_THROWS_AS(branching_matrix({{1.0}}, {0.0}, 0, 10), invalid_input);
}

TEST_CASE("spectral norm by power iteration") {
  CHECK(spectral_norm({{1.0, 0.0}, {0.0, 1.0}}) == doctest::Approx(1.0));
  CHECK(spectral_norm({{0.0, 0.0}, {0.0, 0.0}}) == doctest::Approx(0.0));
  CHECK(spectral_norm({{3.0, 4.0}, {0.0, 0.0}}) == doctest::Approx(5.0));
  CHECK(spectral_norm({{0.2, 0.15}, {0.2, 0.15}}) ==
        doctest::Approx(std::sqrt(2.0) * 0.25).epsilon(1e-9));
}

TEST_CASE("spectral containment") {
  // Two groups of five vertices; the within-connector part is unconstrained.
  const std::vector<int> groups{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  const EdgePartition part = group_pair_partition(10, groups, kTwoGroupPairs);
  REQUIRE(part.part_sizes() == std::vector<std::int64_t>{10, 25, 10});
  const ConstraintSpec spec = ConstraintSpec::spectral({0.5, 0.5}, 1, kTwoGroupPairs, 0.08);
  // T = m_00 / 50, strict < 0.08 means m_00 <= 3.
  CHECK(contains(spec, Profile{3, 20, 5}, part));
  CHECK(!contains(spec, Profile{4, 20, 5}, part));
  CHECK(!contains(spec, Profile{10, 0, 0}, part));
}

TEST_CASE("spectral containment invariant under relabeling non-connector groups") {
  // Three equal groups on 12 vertices, connector group 2.
  const std::vector<int> groups{0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2};
  const std::vector<std::pair<int, int>> pairs{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
  const EdgePartition part = group_pair_partition(12, groups, pairs);
  const std::vector<double> rho{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const ConstraintSpec spec = ConstraintSpec::spectral(rho, 2, pairs, 0.2);

  // Swap group labels 0 and 1: profile coordinates permute accordingly.
  auto swap01 = [&](const Profile& m) {
    // pairs order: (0,0),(0,1),(0,2),(1,1),(1,2),(2,2) -> swapped: (1,1),(0,1),(1,2),(0,0),(0,2),(2,2)
    return Profile{m[3], m[1], m[4], m[0], m[2], m[5]};
  };
  RandomStream rng(4);
  for (int rep = 0; rep < 40; ++rep) {
    Profile m(6);
    for (std::size_t i = 0; i < 6; ++i)
      m[i] = rng.next_below(part.part_sizes()[i] + 1);
    CHECK(contains(spec, m, part) == contains(spec, swap01(m), part));
  }
}

TEST_CASE("spectral spec validation") {
  CHECK_THROWS_AS(ConstraintSpec::spectral({0.5, 0.5}, 1, {{0, 0}, {0, 1}}, 1.0), invalid_input);
  CHECK_THROWS_AS(ConstraintSpec::spectral({0.7, 0.5}, 1, kTwoGroupPairs, 1.0), invalid_input);
  CHECK_THROWS_AS(ConstraintSpec::spectral({0.5, 0.5}, 2, kTwoGroupPairs, 1.0), invalid_input);
  CHECK_THROWS_AS(ConstraintSpec::spectral({0.5, 0.5}, 1, {{0, 0}, {0, 1}, {0, 1}}, 1.0),
                  invalid_input);
}

TEST_CASE("box validation") {
  CHECK_THROWS_AS(ConstraintSpec::box(Profile{2}, Profile{1}), invalid_input);
  CHECK_THROWS_AS(ConstraintSpec::box(Profile{-1}, Profile{1}), invalid_input);
  const EdgePartition part = EdgePartition::trivial(3);
  CHECK_THROWS_AS(contains(ConstraintSpec::box(Profile{0}, Profile{9}), Profile{1}, part),
                  invalid_input);
}

TEST_CASE("feasible regions bundle spec and partition") {
  const EdgePartition part = EdgePartition::balanced(4, 2);
  const FeasibleRegion region{ConstraintSpec::budget({1.0, 2.0}, 3.0), part};
  CHECK(region.contains(Profile{1, 1}));
  CHECK(!region.contains(Profile{2, 1}));
  const auto feasible = region.enumerate_profiles();
  CHECK(feasible.size() == 6);  // v0 + 2 v1 <= 3 inside the (3,3) box
  CHECK(!region.empty());
  const FeasibleRegion barren{ConstraintSpec::budget({1.0, 1.0}, -1.0), part};
  CHECK(barren.empty());
  const FeasibleRegion huge{ConstraintSpec::budget({1.0}, 5.0), EdgePartition::trivial(40)};
  CHECK_THROWS_AS(huge.enumerate_profiles(10), capacity_error);
}

TEST_CASE("convexity verdicts") {
  const EdgePartition part = EdgePartition::balanced(4, 2);  // sizes (3,3)
  SUBCASE("linear systems are convex") {
    CHECK(verify_convexity(ConstraintSpec::linear({{1.0, 1.0}, {-1.0, 2.0}}, {4.0, 3.0}), part));
  }
  SUBCASE("small budget box is convex by enumeration") {
    // Mirrors a hand-checked instance with sizes (2,2) via an inert third part.
    const EdgePartition p4 = EdgePartition(4, std::vector<int>{0, 0, 1, 1, 2, 2});
    CHECK(verify_convexity(ConstraintSpec::budget({1.0, 1.0, 0.0}, 2.0), p4));
  }
  SUBCASE("explicit gap set is not convex") {
    CHECK(!profile_set_convex({Profile{1}, Profile{3}}));
    CHECK(profile_set_convex({Profile{1}, Profile{2}, Profile{3}}));
  }
  SUBCASE("two-dimensional gap") {
    CHECK(!profile_set_convex({Profile{0, 0}, Profile{2, 0}, Profile{0, 2}, Profile{2, 2}}));
    CHECK(profile_set_convex({Profile{0, 0}, Profile{1, 0}, Profile{0, 1}}));
  }
  SUBCASE("three-dimensional sets") {
    CHECK(!profile_set_convex({Profile{0, 0, 0}, Profile{2, 0, 0}}));
    CHECK(profile_set_convex({Profile{0, 0, 0}, Profile{1, 0, 0}, Profile{0, 1, 0},
                              Profile{0, 0, 1}}));
  }
  SUBCASE("capacity cap is enforced") {
    const EdgePartition big = EdgePartition::trivial(40);
    CHECK_THROWS_AS(verify_convexity(ConstraintSpec::budget({1.0}, 3.0), big, 100), capacity_error);
  }
}

TEST_CASE("hull membership agrees between the planar and general routes") {
  // Random planar integer sets, embedded with a constant third coordinate so
  // the k >= 3 Frank-Wolfe path must reproduce the exact k = 2 verdict.
  RandomStream rng(1234);
  for (int rep = 0; rep < 60; ++rep) {
    const std::int64_t npts = 3 + rng.next_below(8);
    std::vector<Profile> flat, lifted;
    for (std::int64_t i = 0; i < npts; ++i) {
      const std::int64_t x = rng.next_below(7);
      const std::int64_t y = rng.next_below(7);
      flat.push_back(Profile{x, y});
      lifted.push_back(Profile{x, y, 2});
    }
    const bool expect = profile_set_convex(flat);
    CHECK(profile_set_convex(lifted) == expect);
  }
}

TEST_CASE("spectral sublevel sets pass the convexity check") {
  const std::vector<int> groups{0, 0, 0, 1, 1, 1};
  const EdgePartition part = group_pair_partition(6, groups, kTwoGroupPairs);
  const ConstraintSpec spec = ConstraintSpec::spectral({0.5, 0.5}, 1, kTwoGroupPairs, 0.1);
  CHECK(verify_convexity(spec, part));
}
