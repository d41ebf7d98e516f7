#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "semloc/geometry.hpp"
#include "semloc/localizer.hpp"
#include "semloc/types.hpp"

namespace semloc {

enum class TrajectoryPattern { Loop, OutAndBack, Grid, Waypoints };
enum class ViewpointMode { Same, Reversed, AerialJitter };

struct TrajectorySpec {
  TrajectoryPattern pattern = TrajectoryPattern::Loop;
  std::vector<Eigen::Vector2d> waypoints;  // only for Waypoints
  double step_length = 2.0;
  std::size_t laps = 1;
};

/// Seed-deterministic scenario description: the seed fully determines every
/// random draw in generate().
struct ScenarioSpec {
  std::uint64_t seed = 1;
  std::size_t ref_object_count = 200;
  double area_width = 200.0;
  double area_height = 150.0;
  std::vector<std::string> class_names{"rock_small", "rock_medium", "rock_large"};
  std::vector<double> class_weights{0.5, 0.3, 0.2};
  TrajectorySpec trajectory;
  double sensor_range = 30.0;
  double centroid_noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  double missing_fraction = 0.0;
  double drift_rate = 0.0;
  ViewpointMode viewpoint_mode = ViewpointMode::Same;
  double min_object_separation = 2.5;  // between sampled reference objects
  double outlier_clearance = 2.5;      // outliers keep this distance from true objects

  void validate() const {
    if (ref_object_count == 0) throw std::invalid_argument("ref_object_count must be > 0");
    if (!(area_width > 0.0 && area_height > 0.0)) throw std::invalid_argument("area must be positive");
    if (class_names.empty() || class_names.size() != class_weights.size())
      throw std::invalid_argument("class_names and class_weights must align and be nonempty");
    for (double w : class_weights)
      if (!(w >= 0.0)) throw std::invalid_argument("class weights must be >= 0");
    if (!(sensor_range > 0.0)) throw std::invalid_argument("sensor_range must be > 0");
    if (!(centroid_noise_sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
    auto frac = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (!frac(outlier_fraction) || outlier_fraction >= 1.0)
      throw std::invalid_argument("outlier_fraction must be in [0,1)");
    if (!frac(missing_fraction)) throw std::invalid_argument("missing_fraction must be in [0,1]");
    if (!(drift_rate >= 0.0)) throw std::invalid_argument("drift_rate must be >= 0");
    if (!(trajectory.step_length > 0.0)) throw std::invalid_argument("step_length must be > 0");
    if (trajectory.pattern == TrajectoryPattern::Waypoints && trajectory.waypoints.size() < 2)
      throw std::invalid_argument("waypoint trajectory needs >= 2 waypoints");
  }
};

/// One generated scenario: reference map, per-step observation batches in the
/// vehicle's local map frame, drift-corrupted odometry, and exact ground
/// truth (true global poses plus the true local->reference alignment).
struct ScenarioRun {
  ObjectMap reference_map;
  std::vector<std::vector<SemanticObject>> observation_batches;
  std::vector<std::pair<double, RigidTransform>> odometry;
  std::vector<RigidTransform> ground_truth_poses;
  std::vector<double> timestamps;
  RigidTransform true_alignment;
};

namespace detail {

// Drift model constants: a constant heading bias of
// drift_rate * kHeadingBiasPerMeter radians per meter (random sign) plus a
// multiplicative Gaussian step-length error of relative magnitude drift_rate.
inline constexpr double kHeadingBiasPerMeter = 1e-3;
inline constexpr double kRefObjectMaxZ = 0.5;

inline std::vector<Eigen::Vector2d> pattern_waypoints(const ScenarioSpec& spec) {
  const double w = spec.area_width, h = spec.area_height;
  const double x0 = 0.1 * w, x1 = 0.9 * w, y0 = 0.1 * h, y1 = 0.9 * h;
  std::vector<Eigen::Vector2d> pts;
  switch (spec.trajectory.pattern) {
    case TrajectoryPattern::Loop:
      for (std::size_t lap = 0; lap < std::max<std::size_t>(1, spec.trajectory.laps); ++lap) {
        pts.push_back({x0, y0});
        pts.push_back({x1, y0});
        pts.push_back({x1, y1});
        pts.push_back({x0, y1});
      }
      pts.push_back({x0, y0});
      break;
    case TrajectoryPattern::OutAndBack:
      pts.push_back({x0, 0.5 * h});
      pts.push_back({x1, 0.5 * h});
      pts.push_back({x0, 0.5 * h});
      break;
    case TrajectoryPattern::Grid: {
      const int rows = 4;
      for (int r = 0; r < rows; ++r) {
        const double y = y0 + (y1 - y0) * r / (rows - 1);
        if (r % 2 == 0) {
          pts.push_back({x0, y});
          pts.push_back({x1, y});
        } else {
          pts.push_back({x1, y});
          pts.push_back({x0, y});
        }
      }
      break;
    }
    case TrajectoryPattern::Waypoints:
      pts = spec.trajectory.waypoints;
      break;
  }
  return pts;
}

/// Poses sampled every step_length along the waypoint polyline; yaw follows
/// the segment direction.
inline std::vector<RigidTransform> sample_trajectory(const std::vector<Eigen::Vector2d>& wpts,
                                                     double step_length) {
  std::vector<RigidTransform> poses;
  if (wpts.size() < 2) return poses;
  auto yaw_pose = [](const Eigen::Vector2d& p, const Eigen::Vector2d& dir) {
    return rotation_about_z(std::atan2(dir.y(), dir.x()), {p.x(), p.y(), 0.0});
  };
  double carry = 0.0;
  for (std::size_t s = 0; s + 1 < wpts.size(); ++s) {
    const Eigen::Vector2d a = wpts[s], b = wpts[s + 1];
    const double seg_len = (b - a).norm();
    if (seg_len <= 0.0) continue;
    const Eigen::Vector2d dir = (b - a) / seg_len;
    double d = carry;
    while (d < seg_len) {
      poses.push_back(yaw_pose(a + d * dir, dir));
      d += step_length;
    }
    carry = d - seg_len;
  }
  return poses;
}

}  // namespace detail

/// Deterministically expands a scenario spec into a full run. All randomness
/// flows from a single seeded generator in a fixed draw order.
inline ScenarioRun generate(const ScenarioSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  ScenarioRun run;

  // 1. true alignment: uniform random rotation (quaternion) + translation
  {
    Eigen::Vector4d qv;
    for (int i = 0; i < 4; ++i) qv[i] = gauss(rng);
    Eigen::Quaterniond q(qv[0], qv[1], qv[2], qv[3]);
    q.normalize();
    run.true_alignment.rotation = q.toRotationMatrix();
    for (int i = 0; i < 3; ++i)
      run.true_alignment.translation[i] = (unit(rng) * 2.0 - 1.0) * 100.0;
  }
  const RigidTransform align_inv = run.true_alignment.inverse();

  // 2. reference objects, rejection-sampled to keep min separation
  std::vector<double> cumulative(spec.class_weights.size());
  {
    double total = 0.0;
    for (std::size_t i = 0; i < spec.class_weights.size(); ++i) {
      total += spec.class_weights[i];
      cumulative[i] = total;
    }
    if (!(total > 0.0)) throw std::invalid_argument("class weights sum to zero");
    for (auto& c : cumulative) c /= total;
  }
  auto draw_class = [&](std::mt19937_64& g) {
    const double u = unit(g);
    for (std::size_t i = 0; i < cumulative.size(); ++i)
      if (u <= cumulative[i]) return static_cast<ClassId>(i);
    return static_cast<ClassId>(cumulative.size() - 1);
  };

  run.reference_map.frame = Frame::ReferenceGlobal;
  for (std::size_t i = 0; i < spec.ref_object_count; ++i) {
    Eigen::Vector3d p;
    for (int attempt = 0; attempt < 256; ++attempt) {
      p = {unit(rng) * spec.area_width, unit(rng) * spec.area_height,
           unit(rng) * detail::kRefObjectMaxZ};
      bool clear = true;
      for (const auto& o : run.reference_map.objects)
        if ((o.centroid - p).norm() < spec.min_object_separation) {
          clear = false;
          break;
        }
      if (clear) break;
    }
    run.reference_map.objects.push_back({p, draw_class(rng), static_cast<ObjectId>(i)});
  }

  // 3. trajectory and true poses (reference frame)
  const auto true_poses = detail::sample_trajectory(detail::pattern_waypoints(spec),
                                                    spec.trajectory.step_length);
  if (true_poses.size() < 2) throw std::invalid_argument("trajectory produced fewer than 2 poses");
  const std::size_t steps = true_poses.size();

  // 4. drift-corrupted odometry in the local frame
  std::vector<RigidTransform> odom(steps);
  {
    const double bias_sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    const double heading_bias = spec.drift_rate * detail::kHeadingBiasPerMeter * bias_sign;
    odom[0] = compose(align_inv, true_poses[0]);
    for (std::size_t i = 1; i < steps; ++i) {
      const RigidTransform clean_prev = compose(align_inv, true_poses[i - 1]);
      const RigidTransform clean_cur = compose(align_inv, true_poses[i]);
      RigidTransform inc = compose(clean_prev.inverse(), clean_cur);
      const double step_len = inc.translation.norm();
      const double scale_noise = spec.drift_rate * gauss(rng);
      const double dtheta = heading_bias * step_len;
      if (spec.drift_rate > 0.0) {
        inc.translation *= (1.0 + scale_noise);
        inc = compose(rotation_about_z(dtheta), inc);
      }
      odom[i] = compose(odom[i - 1], inc);
    }
  }

  // 5. per-step observations: in-range reference objects, dropped/noised,
  //    plus outliers at the requested fraction of the final batch
  run.observation_batches.resize(steps);
  run.odometry.reserve(steps);
  run.ground_truth_poses = true_poses;
  std::uint64_t obs_id = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    run.timestamps.push_back(static_cast<double>(i));
    run.odometry.emplace_back(static_cast<double>(i), odom[i]);

    auto& batch = run.observation_batches[i];
    const RigidTransform body_from_ref = true_poses[i].inverse();
    for (const auto& o : run.reference_map.objects) {
      if ((o.centroid - true_poses[i].translation).norm() > spec.sensor_range) continue;
      if (spec.missing_fraction > 0.0 && unit(rng) < spec.missing_fraction) continue;
      Eigen::Vector3d body = body_from_ref.apply(o.centroid);
      if (spec.centroid_noise_sigma > 0.0)
        for (int d = 0; d < 3; ++d) body[d] += spec.centroid_noise_sigma * gauss(rng);
      batch.push_back({odom[i].apply(body), o.class_id, obs_id++});
    }
    if (spec.outlier_fraction > 0.0 && !batch.empty()) {
      const double f = spec.outlier_fraction;
      const auto n_true = static_cast<double>(batch.size());
      const auto n_out = static_cast<std::size_t>(std::llround(n_true * f / (1.0 - f)));
      for (std::size_t jj = 0; jj < n_out; ++jj) {
        Eigen::Vector3d p;
        for (int attempt = 0; attempt < 64; ++attempt) {
          p = {unit(rng) * spec.area_width, unit(rng) * spec.area_height,
               unit(rng) * detail::kRefObjectMaxZ};
          bool clear = true;
          for (const auto& o : run.reference_map.objects)
            if ((o.centroid - p).norm() < spec.outlier_clearance) {
              clear = false;
              break;
            }
          if (clear) break;
        }
        const Eigen::Vector3d body = body_from_ref.apply(p);
        batch.push_back({odom[i].apply(body), draw_class(rng), obs_id++});
      }
    }
  }

  // 6. viewpoint handling
  if (spec.viewpoint_mode == ViewpointMode::Reversed) {
    // reference map = objects seen on the first half; stream = second half
    const std::size_t mid = steps / 2;
    std::vector<char> seen(run.reference_map.size(), 0);
    for (std::size_t i = 0; i < mid; ++i)
      for (std::size_t j = 0; j < run.reference_map.size(); ++j)
        if ((run.reference_map[j].centroid - true_poses[i].translation).norm() <=
            spec.sensor_range)
          seen[j] = 1;
    ObjectMap half;
    half.frame = Frame::ReferenceGlobal;
    for (std::size_t j = 0; j < run.reference_map.size(); ++j)
      if (seen[j]) half.objects.push_back(run.reference_map[j]);
    run.reference_map = std::move(half);
    run.observation_batches.erase(run.observation_batches.begin(),
                                  run.observation_batches.begin() + mid);
    run.odometry.erase(run.odometry.begin(), run.odometry.begin() + mid);
    run.ground_truth_poses.erase(run.ground_truth_poses.begin(),
                                 run.ground_truth_poses.begin() + mid);
    run.timestamps.erase(run.timestamps.begin(), run.timestamps.begin() + mid);
  } else if (spec.viewpoint_mode == ViewpointMode::AerialJitter) {
    // annotation-error analog: jitter the reference centroids themselves
    for (auto& o : run.reference_map.objects)
      for (int d = 0; d < 3; ++d) o.centroid[d] += spec.centroid_noise_sigma * gauss(rng);
  }

  return run;
}

/// Per-step pipeline estimate: the map-alignment transform in effect after
/// the step (if localized) and the vehicle-map size, for evaluation.
struct EstimateTrailEntry {
  std::optional<RigidTransform> alignment;
  std::size_t vehicle_map_size = 0;
};

struct RunMetrics {
  bool localized = false;
  std::size_t event_count = 0;
  double distance_to_localize = 0.0;
  std::size_t objects_to_localize = 0;
  std::vector<double> event_position_errors;
  std::vector<double> event_orientation_errors;
  double mean_event_position_error = 0.0;
  double median_event_position_error = 0.0;
  double max_event_position_error = 0.0;
  double mean_event_orientation_error = 0.0;
  double mean_post_localization_error = 0.0;          // per-step, current alignment
  double mean_post_localization_error_global_only = 0.0;  // replay with first transform only
  // per-step series: (odometry distance, error with relocalization, global-only error)
  std::vector<std::array<double, 3>> error_series;
};

namespace detail {

inline double position_error(const RigidTransform& est, const RigidTransform& truth, bool in_2d) {
  Eigen::Vector3d d = est.translation - truth.translation;
  if (in_2d) d.z() = 0.0;
  return d.norm();
}

inline double orientation_error(const RigidTransform& est, const RigidTransform& truth,
                                bool in_2d) {
  if (!in_2d) return rotation_angle_deg(est.rotation, truth.rotation);
  const Eigen::Matrix3d rel = truth.rotation.transpose() * est.rotation;
  return std::abs(rad2deg(std::atan2(rel(1, 0), rel(0, 0))));
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

/// Scores a pipeline run against the scenario's ground truth: per-event pose
/// errors, post-localization trajectory error, and the global-only replay
/// series (as if the first accepted transform were never updated).
inline RunMetrics evaluate_run(const ScenarioRun& run,
                               const std::vector<LocalizationEvent>& event_log,
                               const std::vector<EstimateTrailEntry>& trail,
                               bool in_2d = false) {
  if (trail.size() != run.timestamps.size())
    throw std::invalid_argument("trail length does not match run timeline");
  RunMetrics m;
  m.event_count = event_log.size();
  if (event_log.empty()) return m;
  m.localized = true;

  // cumulative odometry distance per step
  std::vector<double> odom_dist(run.odometry.size(), 0.0);
  for (std::size_t i = 1; i < run.odometry.size(); ++i)
    odom_dist[i] = odom_dist[i - 1] + (run.odometry[i].second.translation -
                                       run.odometry[i - 1].second.translation)
                                          .norm();

  auto step_of = [&](double timestamp) {
    for (std::size_t i = 0; i < run.timestamps.size(); ++i)
      if (run.timestamps[i] == timestamp) return i;
    throw std::invalid_argument("event timestamp not on the run timeline");
  };

  const std::size_t first_step = step_of(event_log.front().timestamp);
  m.distance_to_localize = odom_dist[first_step];
  m.objects_to_localize = trail[first_step].vehicle_map_size;

  for (const auto& ev : event_log) {
    const std::size_t s = step_of(ev.timestamp);
    const RigidTransform est = compose(ev.transform, run.odometry[s].second);
    m.event_position_errors.push_back(
        detail::position_error(est, run.ground_truth_poses[s], in_2d));
    m.event_orientation_errors.push_back(
        detail::orientation_error(est, run.ground_truth_poses[s], in_2d));
  }
  double pos_sum = 0.0, ori_sum = 0.0;
  for (double e : m.event_position_errors) pos_sum += e;
  for (double e : m.event_orientation_errors) ori_sum += e;
  m.mean_event_position_error = pos_sum / static_cast<double>(m.event_position_errors.size());
  m.mean_event_orientation_error =
      ori_sum / static_cast<double>(m.event_orientation_errors.size());
  m.median_event_position_error = detail::median(m.event_position_errors);
  m.max_event_position_error =
      *std::max_element(m.event_position_errors.begin(), m.event_position_errors.end());

  const RigidTransform first_transform = event_log.front().transform;
  double full_sum = 0.0, global_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = first_step; i < run.timestamps.size(); ++i) {
    if (!trail[i].alignment) continue;
    const RigidTransform est_full = compose(*trail[i].alignment, run.odometry[i].second);
    const RigidTransform est_global = compose(first_transform, run.odometry[i].second);
    const double e_full = detail::position_error(est_full, run.ground_truth_poses[i], in_2d);
    const double e_global = detail::position_error(est_global, run.ground_truth_poses[i], in_2d);
    full_sum += e_full;
    global_sum += e_global;
    ++count;
    m.error_series.push_back({odom_dist[i], e_full, e_global});
  }
  if (count > 0) {
    m.mean_post_localization_error = full_sum / static_cast<double>(count);
    m.mean_post_localization_error_global_only = global_sum / static_cast<double>(count);
  }
  return m;
}

}  // namespace semloc
