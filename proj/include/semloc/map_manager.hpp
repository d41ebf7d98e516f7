#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "semloc/geometry.hpp"
#include "semloc/types.hpp"

namespace semloc {

/// The growing vehicle object map plus the odometry trail that scales the
/// drift-dependent thresholds. Object storage keeps first-observation order;
/// a per-object recency stamp tracks the "most recently seen" order, which
/// fusion refreshes.
struct VehicleMapState {
  ObjectMap full_map{.objects = {}, .frame = Frame::VehicleLocal};
  std::vector<std::size_t> observation_counts;  // per object, parallel to full_map
  std::vector<std::uint64_t> recency;           // per object, larger = more recent
  std::vector<std::pair<double, RigidTransform>> odometry_trail;  // (timestamp, local pose)
  double distance_traveled = 0.0;
  std::uint64_t next_object_id = 0;
  std::uint64_t recency_counter = 0;
};

inline void record_odometry(VehicleMapState& state, double timestamp, const RigidTransform& pose) {
  if (!state.odometry_trail.empty())
    state.distance_traveled +=
        (pose.translation - state.odometry_trail.back().second.translation).norm();
  state.odometry_trail.emplace_back(timestamp, pose);
}

/// Folds a batch of newly observed objects (vehicle local frame) into the map.
/// A new observation fuses with the most recently seen same-class object
/// within fusion_radius (centroid -> running mean over observation count,
/// recency refreshed); otherwise it is appended as a new object.
inline void fuse_observations(VehicleMapState& state,
                              const std::vector<SemanticObject>& new_objects,
                              double fusion_radius) {
  for (const auto& obs : new_objects) {
    int match = -1;
    std::uint64_t match_recency = 0;
    for (std::size_t i = 0; i < state.full_map.size(); ++i) {
      const auto& existing = state.full_map.objects[i];
      if (existing.class_id != obs.class_id) continue;
      if ((existing.centroid - obs.centroid).norm() > fusion_radius) continue;
      if (match < 0 || state.recency[i] > match_recency) {
        match = static_cast<int>(i);
        match_recency = state.recency[i];
      }
    }
    if (match >= 0) {
      auto& obj = state.full_map.objects[match];
      const double n = static_cast<double>(state.observation_counts[match]);
      obj.centroid = (obj.centroid * n + obs.centroid) / (n + 1.0);
      state.observation_counts[match] += 1;
      state.recency[match] = ++state.recency_counter;
    } else {
      SemanticObject added = obs;
      added.id = state.next_object_id++;
      state.full_map.objects.push_back(added);
      state.observation_counts.push_back(1);
      state.recency.push_back(++state.recency_counter);
    }
  }
}

/// The r most recently seen objects, oldest first. r = kUnlimited (or r
/// exceeding the map size) returns the whole map in recency order.
inline ObjectMap recent_window(const VehicleMapState& state, std::size_t r) {
  std::vector<std::size_t> idx(state.full_map.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return state.recency[a] < state.recency[b]; });
  const std::size_t take = std::min(r, idx.size());
  ObjectMap out;
  out.frame = Frame::VehicleLocal;
  out.objects.reserve(take);
  for (std::size_t i = idx.size() - take; i < idx.size(); ++i)
    out.objects.push_back(state.full_map.objects[idx[i]]);
  return out;
}

/// Splits the reference map into k spatial slices along its longest
/// bounding-box axis, each widened by overlap_fraction of the slice width on
/// interior borders. Every object lands in at least one submap; border ties
/// land in two.
inline std::vector<ObjectMap> split_submaps(const ObjectMap& ref_map, std::size_t k,
                                            double overlap_fraction = 0.0) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k == 1 || ref_map.empty()) return {ref_map};

  Eigen::Vector3d mn = ref_map[0].centroid, mx = ref_map[0].centroid;
  for (const auto& o : ref_map.objects) {
    mn = mn.cwiseMin(o.centroid);
    mx = mx.cwiseMax(o.centroid);
  }
  int axis = 0;
  const double extent = (mx - mn).maxCoeff(&axis);
  if (extent <= 0.0) return {ref_map};  // all objects coincide

  const double width = extent / static_cast<double>(k);
  const double pad = overlap_fraction * width;
  std::vector<ObjectMap> out(k);
  for (auto& m : out) m.frame = ref_map.frame;
  for (const auto& o : ref_map.objects) {
    const double x = o.centroid[axis];
    for (std::size_t i = 0; i < k; ++i) {
      const double lo = mn[axis] + width * static_cast<double>(i) - pad;
      const double hi = mn[axis] + width * static_cast<double>(i + 1) + pad;
      if (x >= lo && x <= hi) out[i].objects.push_back(o);
    }
  }
  return out;
}

/// Reference objects within margin of the bounding box of the transformed
/// vehicle window. Empty results are allowed (treated as no candidate).
inline ObjectMap restrict_reference(const ObjectMap& ref_map, const RigidTransform& t_cur,
                                    const ObjectMap& veh_window, double margin) {
  ObjectMap out;
  out.frame = ref_map.frame;
  if (veh_window.empty()) return out;
  if (std::isinf(margin)) return ref_map;

  Eigen::Vector3d mn = t_cur.apply(veh_window[0].centroid);
  Eigen::Vector3d mx = mn;
  for (const auto& o : veh_window.objects) {
    const Eigen::Vector3d p = t_cur.apply(o.centroid);
    mn = mn.cwiseMin(p);
    mx = mx.cwiseMax(p);
  }
  mn.array() -= margin;
  mx.array() += margin;
  for (const auto& o : ref_map.objects) {
    if ((o.centroid.array() >= mn.array()).all() && (o.centroid.array() <= mx.array()).all())
      out.objects.push_back(o);
  }
  return out;
}

}  // namespace semloc
