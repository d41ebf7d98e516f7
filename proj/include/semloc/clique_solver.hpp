#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <vector>

#include "semloc/consistency_graph.hpp"

namespace semloc {

inline constexpr std::size_t kDefaultCliqueNodeBudget = 5'000'000;

/// Result of a clique search. certified_exact is true when the search ran to
/// completion; when the node budget was exhausted the members are the best
/// clique found so far (still a valid clique, possibly not maximum).
struct CliqueResult {
  std::vector<int> members;  // ascending vertex indices
  std::size_t size = 0;
  bool certified_exact = false;

  bool is_clique_in(const AdjacencyBits& adj) const {
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        if (!adj.test(members[a], members[b])) return false;
    return true;
  }
};

namespace detail {

using Word = std::uint64_t;

inline int first_bit(const Word* bits, std::size_t words) {
  for (std::size_t w = 0; w < words; ++w)
    if (bits[w]) return static_cast<int>(w * 64 + std::countr_zero(bits[w]));
  return -1;
}

inline int next_bit(const Word* bits, std::size_t words, int from) {
  std::size_t w = static_cast<std::size_t>(from) / 64;
  if (w >= words) return -1;
  Word cur = bits[w] & (~Word{0} << (from % 64));
  while (true) {
    if (cur) return static_cast<int>(w * 64 + std::countr_zero(cur));
    if (++w >= words) return -1;
    cur = bits[w];
  }
}

inline std::size_t count_bits(const Word* bits, std::size_t words) {
  std::size_t c = 0;
  for (std::size_t w = 0; w < words; ++w) c += std::popcount(bits[w]);
  return c;
}

inline void clear_bit(Word* bits, int v) { bits[v / 64] &= ~(Word{1} << (v % 64)); }

inline void clear_below(Word* bits, int v) {
  const std::size_t full = static_cast<std::size_t>(v) / 64;
  for (std::size_t w = 0; w < full; ++w) bits[w] = 0;
  bits[full] &= ~Word{0} << (v % 64);
}

template <typename Fn>
inline void for_each_bit(const Word* bits, std::size_t words, Fn&& fn) {
  for (std::size_t w = 0; w < words; ++w) {
    Word cur = bits[w];
    while (cur) {
      fn(static_cast<int>(w * 64 + std::countr_zero(cur)));
      cur &= cur - 1;
    }
  }
}

/// Tomita-style branch-and-bound maximum-clique search over a bitset graph:
/// greedy-coloring upper bounds, candidate sets as bitsets, deterministic
/// expansion order. Also runs in decision mode (stop once a clique of size
/// initial_best + 1 is found).
class CliqueSearcher {
 public:
  CliqueSearcher(const AdjacencyBits& adj, std::size_t* node_counter, std::size_t node_budget)
      : adj_(adj),
        n_(adj.size()),
        words_(adj.words_per_row()),
        nodes_(node_counter),
        budget_(node_budget) {}

  void run(const Word* candidates, std::size_t initial_best, bool decision_mode) {
    best_size_ = initial_best;
    decision_ = decision_mode;
    stop_ = false;
    best_members_.clear();
    if (n_ == 0) return;
    Level& root = level(0);
    if (candidates) {
      std::copy(candidates, candidates + words_, root.p.begin());
    } else {
      std::fill(root.p.begin(), root.p.end(), ~Word{0});
      if (n_ % 64) root.p[words_ - 1] = (~Word{0}) >> (64 - n_ % 64);
    }
    current_.clear();
    expand(0);
  }

  bool exhausted() const { return exhausted_; }
  bool found() const { return !best_members_.empty(); }
  const std::vector<int>& best_members() const { return best_members_; }

 private:
  struct Level {
    std::vector<Word> p, uncolored, q;
    std::vector<int> order, color;
  };

  // deque keeps references stable while deeper levels are appended
  Level& level(std::size_t depth) {
    while (levels_.size() <= depth) {
      Level l;
      l.p.resize(words_);
      l.uncolored.resize(words_);
      l.q.resize(words_);
      levels_.push_back(std::move(l));
    }
    return levels_[depth];
  }

  // Greedy sequential coloring of P; fills order/color with vertices in
  // nondecreasing color so the branch loop can prune whole suffixes.
  std::size_t color_sort(Level& lv) {
    std::copy(lv.p.begin(), lv.p.end(), lv.uncolored.begin());
    lv.order.clear();
    lv.color.clear();
    int color = 0;
    while (true) {
      int v0 = first_bit(lv.uncolored.data(), words_);
      if (v0 < 0) break;
      ++color;
      std::copy(lv.uncolored.begin(), lv.uncolored.end(), lv.q.begin());
      int v = v0;
      while (v >= 0) {
        clear_bit(lv.q.data(), v);
        clear_bit(lv.uncolored.data(), v);
        const Word* nv = adj_.row(v).data();
        for (std::size_t w = 0; w < words_; ++w) lv.q[w] &= ~nv[w];
        lv.order.push_back(v);
        lv.color.push_back(color);
        v = first_bit(lv.q.data(), words_);
      }
    }
    return lv.order.size();
  }

  void record_if_better() {
    if (current_.size() > best_size_) {
      best_size_ = current_.size();
      best_members_ = current_;
      if (decision_) stop_ = true;
    }
  }

  void expand(std::size_t depth) {
    if (stop_) return;
    if (++*nodes_ > budget_) {
      exhausted_ = true;
      stop_ = true;
      return;
    }
    Level& lv = level(depth);
    Level& nxt = level(depth + 1);
    const std::size_t cnt = color_sort(lv);
    if (cnt == 0) {
      record_if_better();
      return;
    }
    for (std::size_t ii = cnt; ii-- > 0;) {
      if (current_.size() + lv.color[ii] <= best_size_) return;  // colors nondecreasing
      const int v = lv.order[ii];
      clear_bit(lv.p.data(), v);
      const Word* nv = adj_.row(v).data();
      for (std::size_t w = 0; w < words_; ++w) nxt.p[w] = lv.p[w] & nv[w];
      current_.push_back(v);
      expand(depth + 1);
      current_.pop_back();
      if (stop_) return;
    }
  }

  const AdjacencyBits& adj_;
  std::size_t n_, words_;
  std::size_t* nodes_;
  std::size_t budget_;
  std::deque<Level> levels_;
  std::vector<int> current_, best_members_;
  std::size_t best_size_ = 0;
  bool decision_ = false;
  bool stop_ = false;
  bool exhausted_ = false;
};

/// Smallest-last (degeneracy) vertex elimination order, lowest index first on
/// ties. Renumbering the graph this way keeps candidate sets small near the
/// search root.
inline std::vector<int> degeneracy_order(const AdjacencyBits& adj) {
  const std::size_t n = adj.size();
  std::vector<std::size_t> deg(n);
  std::vector<char> removed(n, 0);
  std::size_t max_deg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    deg[i] = adj.degree(i);
    max_deg = std::max(max_deg, deg[i]);
  }
  std::vector<std::vector<int>> buckets(max_deg + 1);
  for (std::size_t i = 0; i < n; ++i) buckets[deg[i]].push_back(static_cast<int>(i));

  std::vector<int> order;
  order.reserve(n);
  for (std::size_t iter = 0; iter < n; ++iter) {
    int v = -1;
    for (std::size_t d = 0; d <= max_deg && v < 0; ++d) {
      auto& b = buckets[d];
      while (!b.empty() && (removed[b.back()] || deg[b.back()] != d)) b.pop_back();
      if (b.empty()) continue;
      v = b.back();
      for (int c : b)
        if (!removed[c] && deg[c] == d && c < v) v = c;  // smallest index wins
    }
    removed[v] = 1;
    order.push_back(v);
    const auto row = adj.row(v);
    for_each_bit(row.data(), row.size(), [&](int j) {
      if (!removed[j]) {
        --deg[j];
        buckets[deg[j]].push_back(j);
      }
    });
  }
  return order;
}

}  // namespace detail

/// Greedy clique: seed with the highest-degree vertex, repeatedly add the
/// candidate with the most remaining candidate neighbors. Deterministic
/// (lowest index on ties); used as the branch-and-bound incumbent.
inline CliqueResult greedy_clique_lower_bound(const AdjacencyBits& adj) {
  CliqueResult res;
  const std::size_t n = adj.size();
  if (n == 0) return res;
  int v0 = 0;
  std::size_t best_deg = adj.degree(0);
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t d = adj.degree(i);
    if (d > best_deg) {
      best_deg = d;
      v0 = static_cast<int>(i);
    }
  }
  std::vector<int> clique{v0};
  std::vector<int> cands;
  for (std::size_t i = 0; i < n; ++i)
    if (adj.test(v0, i)) cands.push_back(static_cast<int>(i));
  while (!cands.empty()) {
    int pick = -1;
    std::size_t pick_score = 0;
    for (int c : cands) {
      std::size_t score = 0;
      for (int d : cands)
        if (d != c && adj.test(c, d)) ++score;
      if (pick < 0 || score > pick_score) {
        pick = c;
        pick_score = score;
      }
    }
    clique.push_back(pick);
    std::vector<int> next;
    for (int c : cands)
      if (c != pick && adj.test(pick, c)) next.push_back(c);
    cands = std::move(next);
  }
  std::sort(clique.begin(), clique.end());
  res.members = std::move(clique);
  res.size = res.members.size();
  res.certified_exact = false;
  return res;
}

inline CliqueResult greedy_clique_lower_bound(const ConsistencyGraph& g) {
  return greedy_clique_lower_bound(g.adjacency);
}

/// Exact maximum clique via branch-and-bound with degeneracy vertex ordering,
/// greedy-coloring bounds, and bitset candidate sets. Ties among maximum
/// cliques break to the lexicographically smallest member set. The node
/// budget keeps worst cases bounded; on exhaustion the best clique found so
/// far is returned with certified_exact = false.
inline CliqueResult max_clique(const AdjacencyBits& adj,
                               std::size_t node_budget = kDefaultCliqueNodeBudget) {
  using namespace detail;
  CliqueResult res;
  const std::size_t n = adj.size();
  if (n == 0) {
    res.certified_exact = true;
    return res;
  }

  std::size_t nodes = 0;

  // Renumber by reverse degeneracy order so dense cores come first.
  std::vector<int> elim = degeneracy_order(adj);
  std::vector<int> perm(n);  // new index -> original index
  for (std::size_t i = 0; i < n; ++i) perm[i] = elim[n - 1 - i];
  std::vector<int> inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = static_cast<int>(i);
  AdjacencyBits renum(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = adj.row(i);
    const int ri = inv[i];
    for_each_bit(row.data(), row.size(), [&](int j) {
      if (j > static_cast<int>(i)) renum.add_edge(ri, inv[j]);
    });
  }

  CliqueResult seed = greedy_clique_lower_bound(adj);

  CliqueSearcher search(renum, &nodes, node_budget);
  search.run(nullptr, seed.size == 0 ? 0 : seed.size - 1, /*decision=*/false);

  std::vector<int> witness;  // original indices, sorted
  if (search.found()) {
    for (int v : search.best_members()) witness.push_back(perm[v]);
    std::sort(witness.begin(), witness.end());
  } else {
    witness = seed.members;
  }

  if (search.exhausted()) {
    res.members = std::move(witness);
    res.size = res.members.size();
    res.certified_exact = false;
    return res;
  }

  const std::size_t target = witness.size();

  // Lexicographic minimization among maximum cliques: greedily force the
  // smallest vertex that still completes to a clique of the proven size.
  // Runs on the original numbering so ties follow the association order.
  const std::size_t words = adj.words_per_row();
  std::vector<Word> pool(words, ~Word{0});
  if (n % 64) pool[words - 1] = (~Word{0}) >> (64 - n % 64);
  std::vector<Word> candidate(words);
  std::vector<int> chosen;
  bool lex_ok = true;
  while (chosen.size() < target && lex_ok) {
    lex_ok = false;
    for (int v = first_bit(pool.data(), words); v >= 0; v = next_bit(pool.data(), words, v + 1)) {
      const Word* nv = adj.row(v).data();
      for (std::size_t w = 0; w < words; ++w) candidate[w] = pool[w] & nv[w];
      clear_below(candidate.data(), v);  // members of a sorted set grow strictly
      const std::size_t need = target - chosen.size() - 1;
      if (count_bits(candidate.data(), words) < need) continue;
      bool ok = need == 0;
      if (!ok) {
        CliqueSearcher probe(adj, &nodes, node_budget);
        probe.run(candidate.data(), need - 1, /*decision=*/true);
        if (probe.exhausted()) {  // budget gone: fall back to the certified witness
          res.members = std::move(witness);
          res.size = res.members.size();
          res.certified_exact = true;
          return res;
        }
        ok = probe.found();
      }
      if (ok) {
        chosen.push_back(v);
        std::copy(candidate.begin(), candidate.end(), pool.begin());
        lex_ok = true;
        break;
      }
    }
  }

  res.members = lex_ok ? std::move(chosen) : std::move(witness);
  res.size = res.members.size();
  res.certified_exact = true;
  return res;
}

inline CliqueResult max_clique(const ConsistencyGraph& g,
                               std::size_t node_budget = kDefaultCliqueNodeBudget) {
  return max_clique(g.adjacency, node_budget);
}

}  // namespace semloc
