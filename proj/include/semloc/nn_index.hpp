#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "semloc/types.hpp"

namespace semloc {
namespace detail {

/// Minimal 3D k-d tree over a fixed point set; nearest-neighbor queries only.
class KdTree3 {
 public:
  explicit KdTree3(std::vector<Eigen::Vector3d> pts) : pts_(std::move(pts)) {
    idx_.resize(pts_.size());
    std::iota(idx_.begin(), idx_.end(), 0);
    nodes_.reserve(pts_.size());
    root_ = build(0, static_cast<int>(idx_.size()));
  }

  double nearest_dist2(const Eigen::Vector3d& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, q, best);
    return best;
  }

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1, right = -1;
  };

  int build(int lo, int hi) {
    if (lo >= hi) return -1;
    Eigen::Vector3d mn = pts_[idx_[lo]], mx = pts_[idx_[lo]];
    for (int i = lo + 1; i < hi; ++i) {
      mn = mn.cwiseMin(pts_[idx_[i]]);
      mx = mx.cwiseMax(pts_[idx_[i]]);
    }
    int axis = 0;
    (mx - mn).maxCoeff(&axis);
    const int mid = (lo + hi) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](int a, int b) { return pts_[a][axis] < pts_[b][axis]; });
    Node node;
    node.point = idx_[mid];
    node.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    nodes_[self].left = build(lo, mid);
    nodes_[self].right = build(mid + 1, hi);
    return self;
  }

  void search(int ni, const Eigen::Vector3d& q, double& best) const {
    if (ni < 0) return;
    const Node& node = nodes_[ni];
    const Eigen::Vector3d& p = pts_[node.point];
    best = std::min(best, (q - p).squaredNorm());
    const double delta = q[node.axis] - p[node.axis];
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, q, best);
    if (delta * delta < best) search(far, q, best);
  }

  std::vector<Eigen::Vector3d> pts_;
  std::vector<int> idx_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace detail

/// Per-class nearest-neighbor structure over a reference map. Small classes
/// are scanned directly; larger ones get a k-d tree.
class NnIndex {
 public:
  static constexpr std::size_t kBruteForceLimit = 64;

  explicit NnIndex(const ObjectMap& ref_map) {
    for (const auto& o : ref_map.objects) buckets_[o.class_id].points.push_back(o.centroid);
    for (auto& [cls, bucket] : buckets_) {
      if (bucket.points.size() >= kBruteForceLimit)
        bucket.tree.emplace(bucket.points);
    }
  }

  /// Squared distance to the nearest reference object of class c, or nullopt
  /// when the class has no reference representative.
  std::optional<double> nearest_dist2(const Eigen::Vector3d& p, ClassId c) const {
    auto it = buckets_.find(c);
    if (it == buckets_.end()) return std::nullopt;
    const Bucket& b = it->second;
    if (b.tree) return b.tree->nearest_dist2(p);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b.points) best = std::min(best, (p - q).squaredNorm());
    return best;
  }

  bool has_class(ClassId c) const { return buckets_.count(c) > 0; }

 private:
  struct Bucket {
    std::vector<Eigen::Vector3d> points;
    std::optional<detail::KdTree3> tree;
  };
  std::map<ClassId, Bucket> buckets_;
};

}  // namespace semloc
