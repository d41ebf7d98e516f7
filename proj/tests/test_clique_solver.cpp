#include <gtest/gtest.h>

#include <random>

#include "semloc/clique_solver.hpp"

using namespace semloc;

namespace {

AdjacencyBits random_graph(std::mt19937_64& rng, std::size_t n, double density) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AdjacencyBits adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (unit(rng) < density) adj.add_edge(i, j);
  return adj;
}

AdjacencyBits complete_graph(std::size_t n) {
  AdjacencyBits adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) adj.add_edge(i, j);
  return adj;
}

// Oracle A: exhaustive subset enumeration (n <= 20). Returns the maximum
// clique size and the lexicographically smallest maximum member set.
std::pair<std::size_t, std::vector<int>> subset_oracle(const AdjacencyBits& adj) {
  const std::size_t n = adj.size();
  std::size_t best_size = 0;
  std::uint32_t best_mask = 0;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size < best_size) continue;
    bool clique = true;
    for (std::size_t i = 0; i < n && clique; ++i) {
      if (!(mask >> i & 1)) continue;
      for (std::size_t j = i + 1; j < n && clique; ++j)
        if ((mask >> j & 1) && !adj.test(i, j)) clique = false;
    }
    if (!clique) continue;
    if (size > best_size) {
      best_size = size;
      best_mask = static_cast<std::uint32_t>(mask);
    } else if (size == best_size) {
      // lex-smallest sorted member set == smallest when read low-bit first;
      // compare element by element
      std::vector<int> a, b;
      for (std::size_t i = 0; i < n; ++i) {
        if (best_mask >> i & 1) a.push_back(static_cast<int>(i));
        if (mask >> i & 1) b.push_back(static_cast<int>(i));
      }
      if (b < a) best_mask = static_cast<std::uint32_t>(mask);
    }
  }
  std::vector<int> members;
  for (std::size_t i = 0; i < n; ++i)
    if (best_mask >> i & 1) members.push_back(static_cast<int>(i));
  return {best_size, members};
}

// Oracle B: plain Bron-Kerbosch (no pivoting) maximum clique size.
void bron_kerbosch(const AdjacencyBits& adj, std::vector<int>& r, std::vector<int> p,
                   std::vector<int> x, std::size_t& best) {
  if (p.empty() && x.empty()) {
    best = std::max(best, r.size());
    return;
  }
  while (!p.empty()) {
    const int v = p.back();
    p.pop_back();
    std::vector<int> pv, xv;
    for (int u : p)
      if (adj.test(u, v)) pv.push_back(u);
    for (int u : x)
      if (adj.test(u, v)) xv.push_back(u);
    r.push_back(v);
    bron_kerbosch(adj, r, pv, xv, best);
    r.pop_back();
    x.push_back(v);
  }
}

std::size_t bk_oracle(const AdjacencyBits& adj) {
  std::vector<int> r, p, x;
  for (std::size_t i = 0; i < adj.size(); ++i) p.push_back(static_cast<int>(i));
  std::size_t best = 0;
  bron_kerbosch(adj, r, p, x, best);
  return best;
}

}  // namespace

TEST(MaxClique, EmptyGraph) {
  const CliqueResult res = max_clique(AdjacencyBits(0));
  EXPECT_EQ(res.size, 0u);
  EXPECT_TRUE(res.certified_exact);
  EXPECT_TRUE(res.members.empty());
}

TEST(MaxClique, CompleteGraphTakesAllVertices) {
  const CliqueResult res = max_clique(complete_graph(5));
  EXPECT_EQ(res.size, 5u);
  EXPECT_TRUE(res.certified_exact);
  EXPECT_EQ(res.members, (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(MaxClique, EdgelessGraphPicksSmallestVertex) {
  const CliqueResult res = max_clique(AdjacencyBits(4));
  EXPECT_EQ(res.size, 1u);
  EXPECT_EQ(res.members, std::vector<int>{0});
}

TEST(MaxClique, MatchesSubsetOracleOnSmallRandomGraphs) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 4 + trial % 13;  // 4..16
    const double density = 0.2 + 0.15 * (trial % 5);
    const AdjacencyBits adj = random_graph(rng, n, density);
    const auto [oracle_size, oracle_members] = subset_oracle(adj);
    const CliqueResult res = max_clique(adj);
    ASSERT_TRUE(res.certified_exact);
    EXPECT_EQ(res.size, oracle_size);
    EXPECT_EQ(res.members, oracle_members);  // exact lex tie-break agreement
    EXPECT_TRUE(res.is_clique_in(adj));
  }
}

TEST(MaxClique, MatchesBronKerboschOnLargerGraphs) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 20; ++trial) {
    const AdjacencyBits adj = random_graph(rng, 18 + trial % 3, 0.4);
    const CliqueResult res = max_clique(adj);
    ASSERT_TRUE(res.certified_exact);
    EXPECT_EQ(res.size, bk_oracle(adj));
    EXPECT_TRUE(res.is_clique_in(adj));
  }
}

TEST(MaxClique, DeterministicAcrossRepeatedSolves) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 10; ++trial) {
    const AdjacencyBits adj = random_graph(rng, 40, 0.3);
    const CliqueResult a = max_clique(adj);
    const CliqueResult b = max_clique(adj);
    EXPECT_EQ(a.members, b.members);
    EXPECT_EQ(a.certified_exact, b.certified_exact);
  }
}

TEST(MaxClique, AddingEdgesNeverShrinksTheClique) {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 25;
    const AdjacencyBits sparse = random_graph(rng, n, 0.2);
    AdjacencyBits denser = sparse;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!sparse.test(i, j) && unit(rng) < 0.2) denser.add_edge(i, j);
    const CliqueResult a = max_clique(sparse);
    const CliqueResult b = max_clique(denser);
    ASSERT_TRUE(a.certified_exact && b.certified_exact);
    EXPECT_GE(b.size, a.size);
  }
}

TEST(MaxClique, BudgetExhaustionStillReturnsAValidClique) {
  std::mt19937_64 rng(505);
  const AdjacencyBits adj = random_graph(rng, 60, 0.9);
  const CliqueResult res = max_clique(adj, /*node_budget=*/5);
  EXPECT_FALSE(res.certified_exact);
  EXPECT_TRUE(res.is_clique_in(adj));
  EXPECT_GE(res.size, 1u);
}

TEST(GreedyClique, EmptyGraph) {
  EXPECT_EQ(greedy_clique_lower_bound(AdjacencyBits(0)).size, 0u);
}

TEST(GreedyClique, ExactOnCompleteGraphs) {
  EXPECT_EQ(greedy_clique_lower_bound(complete_graph(4)).size, 4u);
}

TEST(GreedyClique, NeverExceedsTheExactSolution) {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 30; ++trial) {
    const AdjacencyBits adj = random_graph(rng, 20, 0.3 + 0.1 * (trial % 4));
    const CliqueResult greedy = greedy_clique_lower_bound(adj);
    const CliqueResult exact = max_clique(adj);
    EXPECT_TRUE(greedy.is_clique_in(adj));
    EXPECT_LE(greedy.size, exact.size);
  }
}
