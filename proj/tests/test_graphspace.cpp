#include <cmath>
#include <sstream>

#include "doctest.h"
#include "symgraph/graphspace.hpp"
#include "symgraph/io.hpp"

using namespace symgraph;

TEST_CASE("enumerate_edges canonical order") {
  CHECK(enumerate_edges(3) == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(enumerate_edges(2) == std::vector<std::pair<int, int>>{{0, 1}});
  const auto e4 = enumerate_edges(4);
  CHECK(e4.size() == 6);
  CHECK(e4.back() == std::pair<int, int>{2, 3});
  CHECK_THROWS_AS(enumerate_edges(1), invalid_input);
}

TEST_CASE("edge_index round-trips endpoints") {
  for (int n : {2, 3, 5, 9}) {
    const auto edges = enumerate_edges(n);
    for (std::int64_t e = 0; e < static_cast<std::int64_t>(edges.size()); ++e) {
      CHECK(edge_index(n, edges[e].first, edges[e].second) == e);
      CHECK(edge_endpoints(n, e) == edges[static_cast<std::size_t>(e)]);
    }
  }
}

TEST_CASE("cost binning") {
  SUBCASE("all equal costs collapse to one part") {
    const auto part = EdgePartition::from_costs(3, std::vector<double>{1.0, 1.0, 1.0}, 0.5);
    CHECK(part.k() == 1);
    CHECK(part.part_sizes()[0] == 3);
  }
  SUBCASE("bins [1,1.5) and [1.5,2.25)") {
    const auto part = EdgePartition::from_costs(3, std::vector<double>{1.0, 1.0, 2.0}, 0.5);
    CHECK(part.k() == 2);
    CHECK(part.part_sizes() == std::vector<std::int64_t>{2, 1});
  }
  SUBCASE("unit square with diagonals at ratio 0.2") {
    const double r2 = std::sqrt(2.0);
    const auto part = EdgePartition::from_costs(4, std::vector<double>{1, 1, r2, r2, 1, 1}, 0.2);
    CHECK(part.k() == 2);
    CHECK(part.part_sizes() == std::vector<std::int64_t>{4, 2});
  }
  SUBCASE("zero-cost edges form a dedicated first part") {
    const auto part = EdgePartition::from_costs(3, std::vector<double>{0.0, 1.0, 1.0}, 0.5);
    CHECK(part.k() == 2);
    CHECK(part.part_of(0) == 0);
    CHECK(part.part_sizes() == std::vector<std::int64_t>{1, 2});
  }
  SUBCASE("rescaling all costs keeps the binning") {
    const std::vector<double> base{1.0, 1.3, 2.0, 2.6, 5.1, 1.1};
    const auto p1 = EdgePartition::from_costs(4, base, 0.4);
    for (double t : {0.5, 2.0, 1024.0, 3.0}) {
      std::vector<double> scaled;
      for (double c : base) scaled.push_back(c * t);
      CHECK(EdgePartition::from_costs(4, scaled, 0.4) == p1);
    }
  }
  CHECK_THROWS_AS(EdgePartition::from_costs(3, std::vector<double>{1, 1, 1}, 0.0), invalid_input);
  CHECK_THROWS_AS(EdgePartition::from_costs(3, std::vector<double>{1, 1}, 0.5), invalid_input);
}

TEST_CASE("edge_profile and density_profile") {
  const EdgePartition part = EdgePartition::balanced(4, 2);  // first 3 edges, last 3
  SUBCASE("empty and complete") {
    CHECK(edge_profile(Graph(4), part) == Profile{0, 0});
    CHECK(edge_profile(Graph::complete(4), part) == Profile{3, 3});
  }
  SUBCASE("path graph example") {
    const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 3}};
    const Graph g = Graph::from_edges(4, edges);
    CHECK(edge_profile(g, part) == Profile{1, 2});
  }
  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS_AS(edge_profile(Graph(5), part), invalid_input);
  }
  SUBCASE("densities") {
    CHECK(density_profile(Profile{0, 0}, part) == std::vector<double>{0.0, 0.0});
    CHECK(density_profile(Profile{3, 3}, part) == std::vector<double>{1.0, 1.0});
    const auto a = density_profile(Profile{3, 1}, part);
    CHECK(a[0] == doctest::Approx(1.0));
    CHECK(a[1] == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("complement profile identity") {
  RandomStream rng(31);
  const EdgePartition part = EdgePartition::balanced(6, 3);
  for (int rep = 0; rep < 20; ++rep) {
    Graph g(6);
    for (std::int64_t e = 0; e < g.num_slots(); ++e) g.set_edge(e, rng.next_below(2) == 1);
    const Profile m = edge_profile(g, part);
    const Profile mc = edge_profile(g.complement(), part);
    for (int i = 0; i < part.k(); ++i)
      CHECK(m[static_cast<std::size_t>(i)] + mc[static_cast<std::size_t>(i)] ==
            part.part_sizes()[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("within-part permutations preserve profiles") {
  RandomStream rng(77);
  const EdgePartition part = EdgePartition::balanced(6, 4);
  for (int rep = 0; rep < 50; ++rep) {
    Graph g(6);
    for (std::int64_t e = 0; e < g.num_slots(); ++e) g.set_edge(e, rng.next_below(2) == 1);
    const Graph permuted = permute_within_parts(g, part, rng);
    CHECK(edge_profile(permuted, part) == edge_profile(g, part));
    CHECK(permuted.edge_count() == g.edge_count());
  }
}

TEST_CASE("partition validation") {
  CHECK_THROWS_AS(EdgePartition(4, std::vector<int>{0, 0, 0, 0, 0}), invalid_input);  // wrong N
  CHECK_THROWS_AS(EdgePartition(4, std::vector<int>{0, 0, 2, 2, 2, 2}), invalid_input);  // empty part 1
  const EdgePartition part = EdgePartition::balanced(5, 3);
  CHECK(part.part_sizes() == std::vector<std::int64_t>{4, 3, 3});
}

TEST_CASE("graph and partition text formats round-trip") {
  const Graph g = Graph::from_edges(5, std::vector<std::pair<int, int>>{{0, 1}, {1, 4}, {2, 3}});
  std::stringstream buf;
  write_graph(buf, g);
  CHECK(read_graph(buf) == g);

  const EdgePartition part = EdgePartition::balanced(5, 3);
  std::stringstream buf2;
  write_partition(buf2, part);
  CHECK(read_partition(buf2) == part);

  std::stringstream stream;
  write_graph(stream, g);
  stream << "\n";
  write_graph(stream, Graph::complete(3));
  const auto first = read_next_graph(stream);
  const auto second = read_next_graph(stream);
  const auto done = read_next_graph(stream);
  REQUIRE(first.has_value());
  REQUIRE(second.has_value());
  CHECK(*first == g);
  CHECK(*second == Graph::complete(3));
  CHECK(!done.has_value());
}
