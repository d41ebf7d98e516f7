#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "semloc/clique_solver.hpp"
#include "semloc/consistency_graph.hpp"
#include "semloc/geometry.hpp"
#include "semloc/nn_index.hpp"
#include "semloc/types.hpp"

namespace semloc {

struct InsufficientCorrespondences : std::runtime_error {
  InsufficientCorrespondences() : std::runtime_error("fewer than 3 correspondence pairs") {}
};

struct DegenerateGeometry : std::runtime_error {
  DegenerateGeometry() : std::runtime_error("collinear correspondences: rotation unobservable") {}
};

struct NoScoreableObjects : std::runtime_error {
  NoScoreableObjects() : std::runtime_error("no vehicle object has a same-class reference neighbor") {}
};

using CorrespondencePair = std::pair<Eigen::Vector3d, Eigen::Vector3d>;  // (ref, veh)

/// Least-squares rigid fit of matched point pairs: minimizes
/// sum || R * veh_j + t - ref_j ||^2 via the cross-covariance SVD with
/// determinant-sign correction.
inline RigidTransform fit_rigid(const std::vector<CorrespondencePair>& correspondences) {
  const std::size_t n = correspondences.size();
  if (n < 3) throw InsufficientCorrespondences();

  Eigen::Vector3d ref_centroid = Eigen::Vector3d::Zero();
  Eigen::Vector3d veh_centroid = Eigen::Vector3d::Zero();
  for (const auto& [p, q] : correspondences) {
    ref_centroid += p;
    veh_centroid += q;
  }
  ref_centroid /= static_cast<double>(n);
  veh_centroid /= static_cast<double>(n);

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  double veh_spread = 0.0;
  Eigen::Matrix3d veh_scatter = Eigen::Matrix3d::Zero();
  for (const auto& [p, q] : correspondences) {
    const Eigen::Vector3d dq = q - veh_centroid;
    cross += dq * (p - ref_centroid).transpose();
    veh_scatter += dq * dq.transpose();
    veh_spread = std::max(veh_spread, dq.squaredNorm());
  }

  // Collinear source points leave rotation about the line unobservable.
  Eigen::JacobiSVD<Eigen::Matrix3d> scatter_svd(veh_scatter);
  const auto& sv = scatter_svd.singularValues();
  if (sv(1) <= 1e-12 * std::max(sv(0), 1.0)) throw DegenerateGeometry();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d rotation = v * u.transpose();
  if (rotation.determinant() < 0.0) {
    u.col(2) *= -1.0;  // flip the smallest singular direction
    rotation = v * u.transpose();
  }

  RigidTransform out;
  out.rotation = rotation;
  out.translation = ref_centroid - rotation * veh_centroid;
  return out;
}

/// Root-mean-square nearest-neighbor distance of the transformed vehicle
/// window against the reference map. Matching is class-aware: each vehicle
/// object pairs with the nearest reference object of its own class. Objects
/// whose class is absent from the reference (or excluded by class_filter) are
/// skipped; an empty effective window is an error.
inline double compute_rmse(const RigidTransform& t, const ObjectMap& veh_window,
                           const NnIndex& ref_index,
                           const std::optional<std::set<ClassId>>& class_filter = std::nullopt) {
  double sum_sq = 0.0;
  std::size_t scored = 0;
  for (const auto& o : veh_window.objects) {
    if (class_filter && !class_filter->count(o.class_id)) continue;
    const auto d2 = ref_index.nearest_dist2(t.apply(o.centroid), o.class_id);
    if (!d2) continue;
    sum_sq += *d2;
    ++scored;
  }
  if (scored == 0) throw NoScoreableObjects();
  return std::sqrt(sum_sq / static_cast<double>(scored));
}

inline double compute_rmse(const RigidTransform& t, const ObjectMap& veh_window,
                           const ObjectMap& ref_map,
                           const std::optional<std::set<ClassId>>& class_filter = std::nullopt) {
  return compute_rmse(t, veh_window, NnIndex(ref_map), class_filter);
}

/// One registration attempt against one submap: transform, the clique of
/// inlier associations behind it, and its RMSE score. A candidate without a
/// transform (clique below 3 or degenerate geometry) is unusable but still
/// reports its inlier count.
struct CandidateRegistration {
  std::optional<RigidTransform> transform;
  std::vector<Association> inliers;
  std::vector<IdPair> inlier_ids;  // map-instance-independent copy for reuse
  std::size_t inlier_count = 0;
  double rmse = std::numeric_limits<double>::infinity();
  int submap_id = 0;
  bool clique_certified = true;

  bool usable() const { return transform.has_value(); }
};

/// Full registration of a vehicle window against one reference submap:
/// candidate associations -> consistency graph -> maximum clique -> rigid fit
/// -> RMSE. The RMSE is evaluated on eval_window (defaults to veh_window)
/// against the same submap. Degenerate fits come back unusable, not thrown.
inline CandidateRegistration register_submap(const ObjectMap& ref_submap,
                                             const ObjectMap& veh_window,
                                             const PipelineConfig& cfg,
                                             const std::vector<Association>& prior = {},
                                             const ObjectMap* eval_window = nullptr,
                                             int submap_id = 0) {
  CandidateRegistration cand;
  cand.submap_id = submap_id;

  const auto associations = build_candidate_associations(ref_submap, veh_window, prior);
  const ConsistencyGraph graph = build_graph(associations, ref_submap, veh_window, cfg.epsilon);
  const CliqueResult clique = max_clique(graph, cfg.clique_node_budget);

  cand.inlier_count = clique.size;
  cand.clique_certified = clique.certified_exact;
  cand.inliers.reserve(clique.size);
  for (int v : clique.members) cand.inliers.push_back(graph.vertices[v]);
  for (const auto& a : cand.inliers)
    cand.inlier_ids.push_back({ref_submap[a.ref_index].id, veh_window[a.veh_index].id});

  if (clique.size < 3) return cand;  // no transform: below the fit minimum

  std::vector<CorrespondencePair> pairs;
  pairs.reserve(cand.inliers.size());
  for (const auto& a : cand.inliers)
    pairs.emplace_back(ref_submap[a.ref_index].centroid, veh_window[a.veh_index].centroid);

  try {
    const RigidTransform t = fit_rigid(pairs);
    const ObjectMap& window = eval_window ? *eval_window : veh_window;
    cand.rmse = compute_rmse(t, window, ref_submap, cfg.rmse_class_filter);
    cand.transform = t;
  } catch (const DegenerateGeometry&) {
    // unusable candidate, inlier count retained
  } catch (const NoScoreableObjects&) {
  }
  return cand;
}

}  // namespace semloc
