#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "dynpriv/errors.hpp"
#include "dynpriv/graph.hpp"
#include "support.hpp"

using namespace dynpriv;

namespace {

// Reachability by repeated squaring of the boolean adjacency.
std::size_t scc_by_closure(std::size_t n, const std::vector<std::vector<std::size_t>>& in) {
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    reach[i][i] = true;
    for (std::size_t j : in[i]) reach[j][i] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  std::set<std::vector<bool>> classes;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<bool> cls(n);
    for (std::size_t j = 0; j < n; ++j) cls[j] = reach[i][j] && reach[j][i];
    classes.insert(cls);
  }
  return classes.size();
}

// Subset test by bitmask over the closed neighbourhoods.
std::vector<std::pair<std::size_t, std::size_t>> nested_by_bitmask(const WeightedDigraph& g) {
  const std::size_t n = g.size();
  std::vector<unsigned long long> mask(n);
  for (std::size_t i = 0; i < n; ++i) mask[i] = 1ull << i;
  for (const Edge& e : g.edges()) mask[e.dst] |= 1ull << e.src;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && (mask[i] & ~mask[j]) == 0) out.emplace_back(i, j);
  return out;
}

}  // namespace

TEST_CASE("edges are validated, merged and sorted") {
  CHECK_THROWS_AS(WeightedDigraph(2, {{0, 2, 1.0}}), InvalidGraph);
  CHECK_THROWS_AS(WeightedDigraph(2, {{1, 1, 1.0}}), InvalidGraph);
  CHECK_THROWS_AS(WeightedDigraph(2, {{0, 1, 0.0}}), InvalidGraph);
  CHECK_THROWS_AS(WeightedDigraph(2, {{0, 1, -1.0}}), InvalidGraph);
  const WeightedDigraph g(3, {{2, 0, 1.0}, {0, 1, 0.5}, {0, 1, 0.25}});
  REQUIRE(g.edges().size() == 2);
  CHECK(g.edges()[0] == Edge{0, 1, 0.75});
  CHECK(g.edges()[1] == Edge{2, 0, 1.0});
  CHECK(g == WeightedDigraph(3, {{0, 1, 0.75}, {2, 0, 1.0}}));
}

TEST_CASE("Laplacian of a weighted three-node graph") {
  // 2->0 merges to weight 3; in- and out-weights are 3, 2, 3
  const WeightedDigraph g(3, {{0, 1, 2}, {1, 2, 2}, {2, 0, 2}, {0, 2, 1}, {2, 0, 1}});
  const BalancedLaplacian L = build_laplacian(g);
  const std::vector<double> expected{3, 0, -3,  //
                                     -2, 2, 0,  //
                                     -1, -2, 3};
  CHECK(std::vector<double>(L.dense().begin(), L.dense().end()) == expected);
  CHECK(L.max_abs_row_sum() == 0.0);
  CHECK(L.max_abs_col_sum() == 0.0);
  CHECK(L.inf_norm() == 6.0);
  CHECK(L.sparse().val.size() == 7);
}

TEST_CASE("unbalanced graphs are rejected with the worst node") {
  // path 0->1->2: node 0 has out 1 in 0, node 2 in 1 out 0
  const WeightedDigraph path(3, {{0, 1, 1}, {1, 2, 3}});
  try {
    (void)build_laplacian(path);
    FAIL("expected UnbalancedGraph");
  } catch (const UnbalancedGraph& e) {
    CHECK(e.node() == 2);
    CHECK(e.imbalance() == doctest::Approx(3.0));
  }
  CHECK_THROWS_AS(build_laplacian(WeightedDigraph(0, {})), EmptyGraph);
}

TEST_CASE("from_dense checks signs and sums") {
  CHECK_NOTHROW(BalancedLaplacian::from_dense(2, {1, -1, -1, 1}));
  CHECK_THROWS_AS(BalancedLaplacian::from_dense(2, {-1, 1, 1, -1}), InvalidLaplacian);
  CHECK_THROWS_AS(BalancedLaplacian::from_dense(2, {1, -1, -0.5, 0.5}), InvalidLaplacian);
  CHECK_THROWS_AS(BalancedLaplacian::from_dense(2, {1, -1, -1}), InvalidLaplacian);
  CHECK_THROWS_AS(BalancedLaplacian::from_dense(0, {}), EmptyGraph);
  CHECK_NOTHROW(BalancedLaplacian::from_dense(2, {1, -1 + 5e-13, -1, 1 - 5e-13}));
}

TEST_CASE("strong connectivity matches transitive closure") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 9;
    std::vector<std::vector<std::size_t>> in(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && rng() % 4 == 0) in[i].push_back(j);
    CHECK(scc_count(n, in) == scc_by_closure(n, in));
  }
  CHECK(is_irreducible(build_laplacian(testing::directed_cycle(5))));
  const WeightedDigraph two_cycles(4, {{0, 1, 1}, {1, 0, 1}, {2, 3, 1}, {3, 2, 1}});
  CHECK_FALSE(is_irreducible(build_laplacian(two_cycles)));
}

TEST_CASE("nested neighbourhoods match a bitmask oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng() % 10;
    const WeightedDigraph g = random_balanced_digraph(n, rng() % 6, rng());
    CHECK(check_assumption1(g) == nested_by_bitmask(g));
  }
}

TEST_CASE("nested neighbourhoods on reference graphs") {
  CHECK(check_assumption1(testing::directed_cycle(3)).empty());
  CHECK(check_assumption1(testing::directed_cycle(6)).empty());
  const auto complete = check_assumption1(testing::complete_graph(4));
  CHECK(complete.size() == 12);
  using P = std::pair<std::size_t, std::size_t>;
  CHECK(check_assumption1(testing::ring_with_chord()) == std::vector<P>{{1, 0}});
  // 3-cycle with an extra 0 <-> 2 pair: node 2 sees both 0 and 1
  const WeightedDigraph tri(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}, {0, 2, 1}, {2, 0, 1}});
  CHECK(check_assumption1(tri) == std::vector<P>{{0, 2}, {1, 2}});
}

TEST_CASE("random balanced digraphs") {
  CHECK_THROWS_AS(random_balanced_digraph(2, 1, 0), InvalidSize);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t n = 3 + seed % 18;
    const WeightedDigraph g = random_balanced_digraph(n, seed % 7, seed);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(g.in_weight(i) - g.out_weight(i)) <= kBalanceTolerance);
    }
    const BalancedLaplacian L = build_laplacian(g);
    CHECK(is_irreducible(L));
    CHECK(g == random_balanced_digraph(n, seed % 7, seed));
  }
  CHECK_FALSE(random_balanced_digraph(10, 5, 1) == random_balanced_digraph(10, 5, 2));
}
