#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "semloc/types.hpp"

namespace semloc {

/// Symmetric, irreflexive adjacency stored as one bitset row per vertex.
/// Rows give constant-time edge tests and word-wise set intersection, which
/// the clique search leans on heavily.
class AdjacencyBits {
 public:
  AdjacencyBits() = default;
  explicit AdjacencyBits(std::size_t n)
      : n_(n), words_(n == 0 ? 0 : (n + 63) / 64), bits_(n * words_, 0) {}

  std::size_t size() const { return n_; }
  std::size_t words_per_row() const { return words_; }

  void add_edge(std::size_t i, std::size_t j) {
    bits_[i * words_ + j / 64] |= (std::uint64_t{1} << (j % 64));
    bits_[j * words_ + i / 64] |= (std::uint64_t{1} << (i % 64));
  }

  bool test(std::size_t i, std::size_t j) const {
    return (bits_[i * words_ + j / 64] >> (j % 64)) & 1u;
  }

  std::span<const std::uint64_t> row(std::size_t i) const {
    return {bits_.data() + i * words_, words_};
  }

  std::size_t degree(std::size_t i) const {
    std::size_t d = 0;
    for (std::uint64_t w : row(i)) d += std::popcount(w);
    return d;
  }

  std::size_t edge_count() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < n_; ++i) total += degree(i);
    return total / 2;
  }

  friend bool operator==(const AdjacencyBits&, const AdjacencyBits&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// The association graph: one vertex per candidate association, edges between
/// geometrically consistent pairs. Vertices are sorted by (ref_index,
/// veh_index) so downstream tie-breaking is reproducible.
struct ConsistencyGraph {
  std::vector<Association> vertices;
  AdjacencyBits adjacency;

  std::size_t size() const { return vertices.size(); }
};

/// All candidate associations between same-class objects. Without a prior this
/// is the full all-to-all set within each class. With a prior, every object
/// named in a prior pair is matched only to its prior partner; objects free of
/// any prior pair still associate all-to-all within their class.
inline std::vector<Association> build_candidate_associations(
    const ObjectMap& ref_map, const ObjectMap& veh_map,
    const std::vector<Association>& prior = {}) {
  std::vector<char> ref_pinned(ref_map.size(), 0), veh_pinned(veh_map.size(), 0);
  for (const auto& a : prior) {
    ref_pinned[a.ref_index] = 1;
    veh_pinned[a.veh_index] = 1;
  }

  std::vector<Association> out;
  out.reserve(prior.size() + ref_map.size());
  for (const auto& a : prior) out.push_back(a);

  for (int i = 0; i < static_cast<int>(ref_map.size()); ++i) {
    if (ref_pinned[i]) continue;
    for (int j = 0; j < static_cast<int>(veh_map.size()); ++j) {
      if (veh_pinned[j]) continue;
      if (ref_map[i].class_id == veh_map[j].class_id) out.push_back({i, j});
    }
  }

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Distance discrepancy d(a_i, a_j) = | ||p_i - p_j|| - ||q_i - q_j|| |.
inline double pairwise_consistency(const Association& ai, const Association& aj,
                                   const ObjectMap& ref_map, const ObjectMap& veh_map) {
  const double dp = (ref_map[ai.ref_index].centroid - ref_map[aj.ref_index].centroid).norm();
  const double dq = (veh_map[ai.veh_index].centroid - veh_map[aj.veh_index].centroid).norm();
  return std::abs(dp - dq);
}

/// Builds the consistency graph. An edge requires d(a_i, a_j) < epsilon AND
/// distinct endpoints on both sides: two associations reusing the same object
/// cannot coexist in a one-to-one matching, so they are never connected.
inline ConsistencyGraph build_graph(const std::vector<Association>& associations,
                                    const ObjectMap& ref_map, const ObjectMap& veh_map,
                                    double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");

  ConsistencyGraph g;
  g.vertices = associations;
  std::sort(g.vertices.begin(), g.vertices.end());
  const std::size_t n = g.vertices.size();
  g.adjacency = AdjacencyBits(n);

  // Precomputed point-pair distances make the O(n^2) edge pass a lookup each.
  const std::size_t nr = ref_map.size(), nv = veh_map.size();
  std::vector<double> ref_dist(nr * nr), veh_dist(nv * nv);
  for (std::size_t a = 0; a < nr; ++a)
    for (std::size_t b = a; b < nr; ++b) {
      const double d = (ref_map[a].centroid - ref_map[b].centroid).norm();
      ref_dist[a * nr + b] = d;
      ref_dist[b * nr + a] = d;
    }
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t b = a; b < nv; ++b) {
      const double d = (veh_map[a].centroid - veh_map[b].centroid).norm();
      veh_dist[a * nv + b] = d;
      veh_dist[b * nv + a] = d;
    }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& ai = g.vertices[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& aj = g.vertices[j];
      if (ai.ref_index == aj.ref_index || ai.veh_index == aj.veh_index) continue;
      const double dp = ref_dist[static_cast<std::size_t>(ai.ref_index) * nr + aj.ref_index];
      const double dq = veh_dist[static_cast<std::size_t>(ai.veh_index) * nv + aj.veh_index];
      if (std::abs(dp - dq) < epsilon) g.adjacency.add_edge(i, j);
    }
  }
  return g;
}

}  // namespace semloc
