#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

namespace semloc {

/// Sentinel for "no limit" on count-valued parameters (r, r', margins).
inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

using ObjectId = std::uint64_t;
using ClassId = int;

/// A mapped object: 3D centroid plus a semantic class label.
struct SemanticObject {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  ClassId class_id = 0;
  ObjectId id = 0;

  bool finite() const { return centroid.allFinite(); }
};

enum class Frame { VehicleLocal, ReferenceGlobal };

/// Ordered collection of semantic objects with a coordinate-frame tag.
/// Order is observation/insertion order; downstream windowing relies on it.
struct ObjectMap {
  std::vector<SemanticObject> objects;
  Frame frame = Frame::ReferenceGlobal;

  std::size_t size() const { return objects.size(); }
  bool empty() const { return objects.empty(); }
  const SemanticObject& operator[](std::size_t i) const { return objects[i]; }

  bool ids_unique() const {
    std::unordered_set<ObjectId> seen;
    for (const auto& o : objects) {
      if (!seen.insert(o.id).second) return false;
    }
    return true;
  }
};

/// Index pair linking one reference-map object to one vehicle-map object.
/// Both endpoints must carry the same class; use make_association to enforce it.
struct Association {
  int ref_index = -1;
  int veh_index = -1;

  friend bool operator==(const Association&, const Association&) = default;
  friend auto operator<=>(const Association&, const Association&) = default;
};

inline Association make_association(const ObjectMap& ref_map, const ObjectMap& veh_map,
                                    int ref_index, int veh_index) {
  if (ref_index < 0 || static_cast<std::size_t>(ref_index) >= ref_map.size() ||
      veh_index < 0 || static_cast<std::size_t>(veh_index) >= veh_map.size()) {
    throw std::out_of_range("association index out of range");
  }
  if (ref_map[ref_index].class_id != veh_map[veh_index].class_id) {
    throw std::invalid_argument("association endpoints have different classes");
  }
  return Association{ref_index, veh_index};
}

/// Reference/vehicle object-id pair, the map-instance-independent form of an
/// association. Used to carry accepted inliers across registration calls.
struct IdPair {
  ObjectId ref_id = 0;
  ObjectId veh_id = 0;
};

/// Tunable thresholds and window sizes for the whole pipeline.
/// Defaults follow the urban (KITTI-style) profile; katwijk_profile() switches
/// to the sparse unstructured-terrain tuning.
struct PipelineConfig {
  double epsilon = 2.5;            // consistency tolerance [m]
  std::size_t tau_in = 12;         // minimum inlier associations
  double tau_rmse_base = 6.0;      // RMSE acceptance threshold at zero distance [m]
  double tau_rmse_growth = 2.0 / 500.0;  // threshold growth [m per m traveled]
  double alpha = 0.1;              // RMSE band around the best candidate
  double delta = 0.25;             // minimum RMSE difference to swap transforms [m]
  std::size_t r = 75;              // recent-object registration window
  std::size_t r_prime = 150;       // evaluation window (>= r)
  std::size_t k = 4;               // reference submap count
  double submap_overlap_fraction = 0.0;
  double fusion_radius = 1.0;      // same-class fusion radius [m]
  double translation_similarity_base = 10.0;  // [m]
  double rotation_similarity_base = 10.0;     // [deg]
  double translation_similarity_growth = 1.0 / 100.0;  // [m per m traveled]
  double rotation_similarity_growth = 1.0 / 100.0;     // [deg per m traveled]
  double restrict_margin = 50.0;   // reference restriction margin [m]
  std::optional<std::set<ClassId>> rmse_class_filter;  // score only these classes
  std::size_t register_period = 1;         // attempt registration every N batches
  std::size_t clique_node_budget = 5'000'000;  // branch-and-bound node limit
  bool parallel_submaps = true;

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (tau_in < 3) throw std::invalid_argument("tau_in must be >= 3");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    if (r < tau_in) throw std::invalid_argument("r must be >= tau_in");
    if (r_prime < r) throw std::invalid_argument("r_prime must be >= r");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (!(submap_overlap_fraction >= 0.0 && submap_overlap_fraction < 1.0))
      throw std::invalid_argument("submap_overlap_fraction must be in [0,1)");
    if (!(delta >= 0.0)) throw std::invalid_argument("delta must be >= 0");
    if (!(fusion_radius >= 0.0)) throw std::invalid_argument("fusion_radius must be >= 0");
    if (register_period < 1) throw std::invalid_argument("register_period must be >= 1");
  }

  static PipelineConfig kitti_profile() { return PipelineConfig{}; }

  static PipelineConfig katwijk_profile() {
    PipelineConfig cfg;
    cfg.epsilon = 1.5;
    cfg.tau_in = 8;
    cfg.tau_rmse_base = 2.0;
    cfg.tau_rmse_growth = 0.0;
    cfg.r = kUnlimited;
    cfg.r_prime = kUnlimited;
    cfg.k = 1;
    return cfg;
  }

  /// Katwijk tuning for sparse reference maps (tau_in loosened to 6).
  static PipelineConfig katwijk_sparse_profile() {
    PipelineConfig cfg = katwijk_profile();
    cfg.tau_in = 6;
    return cfg;
  }
};

}  // namespace semloc
