#include <chrono>
#include <cmath>
#include <functional>

#include "doctest.h"
#include "symgraph/maxent.hpp"
#include "test_helpers.hpp"

using namespace symgraph;
using symgraph::testing::feasible_profiles;
using symgraph::testing::group_pair_partition;

namespace {

// Sizes like (10,10) do not sum to a triangular number, so instances from the
// formula tables are embedded with an inert remainder part (zero cost, zero
// count) that leaves every asserted value unchanged.
EdgePartition embed_sizes(int n, const std::vector<std::int64_t>& sizes) {
  std::vector<int> map;
  for (std::size_t i = 0; i < sizes.size(); ++i)
    for (std::int64_t j = 0; j < sizes[i]; ++j) map.push_back(static_cast<int>(i));
  const std::int64_t rest = pair_count(n) - static_cast<std::int64_t>(map.size());
  REQUIRE(rest >= 0);
  for (std::int64_t j = 0; j < rest; ++j) map.push_back(static_cast<int>(sizes.size()));
  return EdgePartition(n, std::move(map));
}

double bisect_scalar(const std::function<double(double)>& f, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("profile entropy") {
  SUBCASE("zero profile has zero entropy") {
    const EdgePartition part = EdgePartition::balanced(4, 2);
    CHECK(ent(Profile{0, 0}, part) == doctest::Approx(0.0));
  }
  SUBCASE("single binomial") {
    const EdgePartition part = embed_sizes(4, {4});  // sizes (4, 2)
    CHECK(ent(Profile{2, 0}, part) == doctest::Approx(std::log(6.0)));
  }
  SUBCASE("additivity over parts") {
    const EdgePartition part = embed_sizes(5, {4, 4});  // sizes (4, 4, 2)
    CHECK(ent(Profile{2, 2, 0}, part) == doctest::Approx(2.0 * std::log(6.0)));
  }
  const EdgePartition part = EdgePartition::trivial(4);
  CHECK_THROWS_AS(ent(Profile{7}, part), invalid_input);
  CHECK_THROWS_AS(ent(Profile{-1}, part), invalid_input);
}

TEST_CASE("product-measure entropy") {
  const EdgePartition part = embed_sizes(4, {4});  // sizes (4, 2)
  CHECK(p_entropy(RealProfile{0.0, 0.0}, part) == doctest::Approx(0.0));
  CHECK(p_entropy(RealProfile{2.0, 0.0}, part) == doctest::Approx(4.0 * std::log(2.0)));
  const EdgePartition whole = EdgePartition::trivial(4);  // p = (6)
  CHECK(p_entropy(RealProfile{3.0}, whole) == doctest::Approx(6.0 * std::log(2.0)));
  CHECK_THROWS_AS(p_entropy(RealProfile{9.0, 0.0}, part), invalid_input);
}

TEST_CASE("stirling gap") {
  SUBCASE("zero at the boundary") {
    const EdgePartition part = EdgePartition::balanced(4, 2);
    CHECK(stirling_gap(Profile{0, 0}, part) == doctest::Approx(0.0));
  }
  SUBCASE("half-full single part") {
    const EdgePartition part = EdgePartition::trivial(4);
    const double gap = stirling_gap(Profile{3}, part);
    CHECK(gap == doctest::Approx(6.0 * std::log(2.0) - std::log(20.0)));
    CHECK(gap <= std::log(4.0));
  }
  SUBCASE("tiny part") {
    const EdgePartition part = embed_sizes(3, {2});  // sizes (2, 1)
    CHECK(stirling_gap(Profile{1, 0}, part) == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("random profiles stay within [0, k ln n]") {
    RandomStream rng(5150);
    for (int rep = 0; rep < 400; ++rep) {
      const int n = 3 + static_cast<int>(rng.next_below(30));
      const std::int64_t cap = std::min<std::int64_t>(5, pair_count(n));
      const int k = 1 + static_cast<int>(rng.next_below(cap));
      std::vector<int> map(static_cast<std::size_t>(pair_count(n)));
      for (auto& p : map) p = static_cast<int>(rng.next_below(k));
      for (int i = 0; i < k; ++i) map[static_cast<std::size_t>(i)] = i;
      EdgePartition part(n, map);
      Profile v(static_cast<std::size_t>(part.k()));
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.next_below(part.part_sizes()[i] + 1);
      const double gap = stirling_gap(v, part);
      CHECK(gap >= -1e-9);
      CHECK(gap <= part.k() * std::log(static_cast<double>(n)) + 1e-9);
    }
  }
}

TEST_CASE("inactive budget leaves half densities") {
  const EdgePartition part = embed_sizes(7, {10, 10});  // (10, 10, 1)
  const ConstraintSpec spec = ConstraintSpec::budget({1.0, 2.0, 0.0}, 1000.0);
  const MaxEntSolution sol = maximize_entropy(part, spec);
  REQUIRE(sol.status == SolveStatus::converged);
  for (double a : sol.a_star) CHECK(a == doctest::Approx(0.5));
  for (double d : sol.duals) CHECK(d == 0.0);
  CHECK(sol.kkt_residual <= 1e-12);
}

TEST_CASE("fixed-edge-count family pins the profile") {
  const EdgePartition part = EdgePartition::trivial(4);
  const MaxEntSolution sol = maximize_entropy(part, ConstraintSpec::box(Profile{3}, Profile{3}));
  REQUIRE(sol.status == SolveStatus::converged);
  CHECK(sol.m_star[0] == doctest::Approx(3.0));
  CHECK(sol.q_star[0] == doctest::Approx(0.5));
  CHECK(sol.duals.empty());
}

TEST_CASE("binding budget solves the scalar dual") {
  const EdgePartition part = embed_sizes(7, {10, 10});
  const ConstraintSpec spec = ConstraintSpec::budget({1.0, 2.0, 0.0}, 12.0);

  const auto t0 = std::chrono::steady_clock::now();
  const MaxEntSolution sol = maximize_entropy(part, spec);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(elapsed < 1.0);

  REQUIRE(sol.status == SolveStatus::converged);
  REQUIRE(sol.duals.size() == 1);
  const double lambda = sol.duals[0];

  // Independent scalar oracle: 10/(1+e^l) + 20/(1+e^{2l}) = 12.
  const double oracle = bisect_scalar(
      [](double l) { return 10.0 / (1.0 + std::exp(l)) + 20.0 / (1.0 + std::exp(2.0 * l)) - 12.0; },
      0.0, 50.0);
  CHECK(lambda == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(std::abs(lambda - 0.2445) < 1e-3);
  CHECK(std::abs(sol.m_star[0] - 4.391) < 5e-3);
  CHECK(std::abs(sol.m_star[1] - 3.801) < 5e-3);
  CHECK(std::abs(sol.m_star[0] + 2.0 * sol.m_star[1] - 12.0) <= 1e-6);
  CHECK(sol.kkt_residual <= 1e-8);
  for (std::size_t i = 0; i < 3; ++i) {
    const double cost = (i == 0) ? 1.0 : (i == 1 ? 2.0 : 0.0);
    CHECK(sol.q_star[i] == doctest::Approx(1.0 / (1.0 + std::exp(lambda * cost))).epsilon(1e-10));
  }
}

TEST_CASE("multi-row dual satisfies the closed form and slackness") {
  const EdgePartition part = EdgePartition::balanced(7, 2);  // sizes (11, 10)
  const std::vector<std::vector<double>> a{{1.0, 1.0}, {-1.0, 2.0}};
  const std::vector<double> b{9.0, 4.0};
  const MaxEntSolution sol = maximize_entropy(part, ConstraintSpec::linear(a, b));
  REQUIRE(sol.status == SolveStatus::converged);
  REQUIRE(sol.duals.size() == 2);
  CHECK(sol.kkt_residual <= 1e-8);
  for (std::size_t i = 0; i < 2; ++i) {
    const double u = sol.duals[0] * a[0][i] + sol.duals[1] * a[1][i];
    CHECK(sol.a_star[i] == doctest::Approx(1.0 / (1.0 + std::exp(u))).epsilon(1e-9));
  }
  for (std::size_t j = 0; j < 2; ++j) {
    const double av = a[j][0] * sol.m_star[0] + a[j][1] * sol.m_star[1];
    CHECK(std::abs(sol.duals[j] * (b[j] - av)) <= 1e-8);
    CHECK(av <= b[j] + 1e-8);
  }
}

TEST_CASE("budget duals fall and optimizers grow with the budget") {
  const EdgePartition part = EdgePartition::balanced(7, 2);
  double prev_lambda = std::numeric_limits<double>::infinity();
  RealProfile prev_m{-1.0, -1.0};
  for (double budget = 4.0; budget <= 16.0; budget += 2.0) {
    const MaxEntSolution sol = maximize_entropy(part, ConstraintSpec::budget({1.0, 2.0}, budget));
    REQUIRE(sol.status == SolveStatus::converged);
    CHECK(sol.duals[0] <= prev_lambda + 1e-9);
    CHECK(sol.m_star[0] >= prev_m[0] - 1e-9);
    CHECK(sol.m_star[1] >= prev_m[1] - 1e-9);
    prev_lambda = sol.duals[0];
    prev_m = sol.m_star;
  }
}

TEST_CASE("solver beats every feasible integer profile") {
  struct Instance {
    EdgePartition part;
    ConstraintSpec spec;
  };
  const std::vector<Instance> instances{
      {EdgePartition::trivial(6), ConstraintSpec::budget({1.0}, 4.0)},
      {EdgePartition::balanced(6, 2), ConstraintSpec::budget({1.0, 2.0}, 9.0)},
      {EdgePartition::balanced(6, 2), ConstraintSpec::linear({{1.0, 1.0}, {-1.0, 2.0}}, {10.0, 5.0})},
      {EdgePartition::balanced(7, 2), ConstraintSpec::box(Profile{2, 0}, Profile{9, 10})},
      {EdgePartition::balanced(8, 2),
       ConstraintSpec::intersection({ConstraintSpec::budget({3.0, 1.0}, 17.0),
                                     ConstraintSpec::box(Profile{0, 0}, Profile{14, 9})})},
  };
  for (const auto& inst : instances) {
    const MaxEntSolution sol = maximize_entropy(inst.part, inst.spec);
    REQUIRE(sol.status == SolveStatus::converged);
    double best = -1.0;
    for (const Profile& v : feasible_profiles(inst.part, inst.spec))
      best = std::max(best, p_entropy(v, inst.part));
    CHECK(sol.objective >= best - 1e-6);
  }
}

TEST_CASE("spectral solve clamps at the norm boundary") {
  const std::vector<int> groups{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  const std::vector<std::pair<int, int>> pairs{{0, 0}, {0, 1}, {1, 1}};
  const EdgePartition part = group_pair_partition(10, groups, pairs);
  const ConstraintSpec spec = ConstraintSpec::spectral({0.5, 0.5}, 1, pairs, 0.08);
  const MaxEntSolution sol = maximize_entropy(part, spec);
  REQUIRE(sol.status == SolveStatus::converged);
  // T = m_00 / 50 with threshold 0.08: the closure optimum sits at m_00 = 4.
  CHECK(sol.m_star[0] == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(sol.m_star[1] == doctest::Approx(12.5));
  CHECK(sol.m_star[2] == doctest::Approx(5.0));
  double best = -1.0;
  for (const Profile& v : feasible_profiles(part, spec)) best = std::max(best, p_entropy(v, part));
  CHECK(sol.objective >= best - 1e-6);
}

TEST_CASE("binding cross-group spectral solve matches the exhaustive grid") {
  const std::vector<int> groups{0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2};
  const std::vector<std::pair<int, int>> pairs{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
  const EdgePartition part = group_pair_partition(12, groups, pairs);
  const ConstraintSpec spec =
      ConstraintSpec::spectral({1.0 / 3, 1.0 / 3, 1.0 / 3}, 2, pairs, 0.15);
  const MaxEntSolution sol = maximize_entropy(part, spec);
  REQUIRE(sol.status == SolveStatus::converged);
  const auto t = branching_matrix(
      {{sol.m_star[0], sol.m_star[1], 0.0}, {sol.m_star[1], sol.m_star[3], 0.0}, {0.0, 0.0, 0.0}},
      {1.0 / 3, 1.0 / 3, 1.0 / 3}, 2, 12);
  CHECK(spectral_norm(t) == doctest::Approx(0.15).epsilon(1e-6));
  double best = -1.0;
  for (const Profile& v : feasible_profiles(part, spec)) best = std::max(best, p_entropy(v, part));
  CHECK(sol.objective >= best - 1e-6);
}

TEST_CASE("infeasible constraints are reported, not thrown") {
  const EdgePartition part = EdgePartition::balanced(5, 2);
  CHECK(maximize_entropy(part, ConstraintSpec::budget({1.0, 2.0}, -1.0)).status ==
        SolveStatus::infeasible);
  const ConstraintSpec clash = ConstraintSpec::intersection(
      {ConstraintSpec::box(Profile{0, 0}, Profile{1, 1}), ConstraintSpec::box(Profile{3, 3}, Profile{5, 5})});
  CHECK(maximize_entropy(part, clash).status == SolveStatus::infeasible);
  const ConstraintSpec mixed = ConstraintSpec::linear({{1.0, 0.0}, {-1.0, 0.0}}, {2.0, -3.0});
  CHECK(maximize_entropy(part, mixed).status == SolveStatus::infeasible);
}

TEST_CASE("iteration cap surfaces as a status") {
  const EdgePartition part = EdgePartition::balanced(7, 2);
  SolveOptions opts;
  opts.max_iterations = 1;
  const MaxEntSolution sol = maximize_entropy(part, ConstraintSpec::budget({1.0, 2.0}, 12.0), opts);
  CHECK(sol.status == SolveStatus::iteration_limit);
  CHECK(!sol.m_star.empty());
}

TEST_CASE("product matrix carries part probabilities") {
  const EdgePartition part = EdgePartition::trivial(4);
  const MaxEntSolution sol = maximize_entropy(part, ConstraintSpec::box(Profile{3}, Profile{3}));
  const auto q = product_matrix(sol, part);
  for (int u = 0; u < 4; ++u)
    for (int v = 0; v < 4; ++v) CHECK(q[static_cast<std::size_t>(u) * 4 + v] ==
                                      doctest::Approx(u == v ? 0.0 : 0.5));

  MaxEntSolution broken = sol;
  broken.status = SolveStatus::iteration_limit;
  CHECK_THROWS_AS(product_matrix(broken, part), invalid_state);

  const EdgePartition embedded = embed_sizes(7, {10, 10});
  const MaxEntSolution budget = maximize_entropy(embedded, ConstraintSpec::budget({1.0, 2.0, 0.0}, 12.0));
  const auto qb = product_matrix(budget, embedded);
  const auto edges = enumerate_edges(7);
  for (std::int64_t e = 0; e < embedded.num_edges(); ++e) {
    const auto [u, v] = edges[static_cast<std::size_t>(e)];
    CHECK(qb[static_cast<std::size_t>(u) * 7 + v] ==
          doctest::Approx(budget.q_star[static_cast<std::size_t>(embedded.part_of(e))]));
  }
}

TEST_CASE("degenerate corner budgets saturate cleanly") {
  const EdgePartition part = EdgePartition::balanced(5, 2);
  const MaxEntSolution sol = maximize_entropy(part, ConstraintSpec::budget({1.0, 1.0}, 0.0));
  REQUIRE(sol.status == SolveStatus::converged);
  CHECK(sol.m_star[0] <= 1e-9);
  CHECK(sol.m_star[1] <= 1e-9);
}
