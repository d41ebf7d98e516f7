#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "semloc/types.hpp"

namespace semloc {

inline constexpr double kRotationTolerance = 1e-9;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Rigid motion in SE(3), vehicle frame -> reference frame.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return RigidTransform{}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  /// Max deviation of R^T R from identity plus |det R - 1|.
  double orthonormality_error() const {
    Eigen::Matrix3d gram = rotation.transpose() * rotation;
    double err = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    return std::max(err, std::abs(rotation.determinant() - 1.0));
  }

  bool is_valid(double tol = kRotationTolerance) const {
    return rotation.allFinite() && translation.allFinite() && orthonormality_error() <= tol;
  }
};

/// Nearest proper rotation to an arbitrary 3x3 matrix (polar factor via SVD).
inline Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d r = u * v.transpose();
  if (r.determinant() < 0.0) {
    u.col(2) *= -1.0;
    r = u * v.transpose();
  }
  return r;
}

inline RigidTransform rotation_about_z(double angle_rad, const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
  RigidTransform out;
  const double c = std::cos(angle_rad), s = std::sin(angle_rad);
  out.rotation << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  out.translation = t;
  return out;
}

/// Applies t to every centroid; class, id, and order are untouched.
inline ObjectMap apply_transform(const RigidTransform& t, const ObjectMap& m) {
  ObjectMap out = m;
  for (auto& o : out.objects) o.centroid = t.apply(o.centroid);
  return out;
}

/// Composition: result applies t2 first, then t1. Rotation is re-projected
/// onto SO(3) if drift exceeds the validity tolerance.
inline RigidTransform compose(const RigidTransform& t1, const RigidTransform& t2) {
  RigidTransform out;
  out.rotation = t1.rotation * t2.rotation;
  out.translation = t1.rotation * t2.translation + t1.translation;
  if (out.orthonormality_error() > kRotationTolerance) {
    out.rotation = nearest_rotation(out.rotation);
  }
  return out;
}

/// Geodesic angle between two rotations, in degrees. Computed from both the
/// trace and the antisymmetric part of the relative rotation; the atan2 form
/// stays accurate for near-identity differences where acos of the trace
/// bottoms out around 1e-6 degrees.
inline double rotation_angle_deg(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2) {
  const Eigen::Matrix3d rel = r1.transpose() * r2;
  const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Eigen::Vector3d skew{rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0),
                             rel(1, 0) - rel(0, 1)};
  return rad2deg(std::atan2(0.5 * skew.norm(), c));
}

/// (translation gap [m], geodesic rotation gap [deg]) between two transforms.
inline std::pair<double, double> transform_distance(const RigidTransform& t1,
                                                    const RigidTransform& t2) {
  return {(t1.translation - t2.translation).norm(),
          rotation_angle_deg(t1.rotation, t2.rotation)};
}

}  // namespace semloc
