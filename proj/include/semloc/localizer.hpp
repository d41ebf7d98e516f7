#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "semloc/geometry.hpp"
#include "semloc/registration.hpp"
#include "semloc/types.hpp"

namespace semloc {

struct NotLocalized : std::runtime_error {
  NotLocalized() : std::runtime_error("no accepted registration yet") {}
};

enum class Mode { GlobalSearch, Guided };

struct LocalizationEvent {
  double timestamp = 0.0;
  RigidTransform transform;
  std::size_t inlier_count = 0;
  double rmse = 0.0;
  Mode mode = Mode::GlobalSearch;
};

/// Mutable state of the two-mode acceptance machine. t_cur is present exactly
/// in Guided mode; the event log is append-only.
struct LocalizerState {
  Mode mode = Mode::GlobalSearch;
  std::optional<RigidTransform> t_cur;
  std::vector<Association> last_inliers;
  std::vector<IdPair> last_inlier_ids;
  double distance_at_last_accept = 0.0;
  std::vector<LocalizationEvent> event_log;
};

/// RMSE acceptance threshold, loosened linearly with distance traveled to
/// absorb drift-induced map distortion.
inline double tau_rmse_at(const PipelineConfig& cfg, double distance_traveled) {
  if (distance_traveled < 0.0) throw std::invalid_argument("distance must be >= 0");
  return cfg.tau_rmse_base + cfg.tau_rmse_growth * distance_traveled;
}

namespace detail {

inline void accept(LocalizerState& state, const CandidateRegistration& cand, Mode mode,
                   double distance_traveled, double timestamp) {
  state.mode = Mode::Guided;
  state.t_cur = cand.transform;
  state.last_inliers = cand.inliers;
  state.last_inlier_ids = cand.inlier_ids;
  state.distance_at_last_accept = distance_traveled;
  state.event_log.push_back(
      {timestamp, *cand.transform, cand.inlier_count, cand.rmse, mode});
}

}  // namespace detail

/// Global-localization selection over the per-submap candidates:
///   1. keep usable candidates with inlier_count >= tau_in (the valid set),
///   2. reject outright if the best RMSE in the valid set exceeds the
///      distance-scaled threshold,
///   3. among candidates with RMSE within (1+alpha) of the best, pick the one
///      with the most inliers (ties: lowest RMSE, then lowest submap_id).
/// Returns the accepted candidate and flips the state to Guided, or nullopt
/// to wait for more data.
inline std::optional<CandidateRegistration> global_localize(
    LocalizerState& state, const std::vector<CandidateRegistration>& candidates,
    const PipelineConfig& cfg, double distance_traveled, double timestamp = 0.0) {
  const CandidateRegistration* best = nullptr;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    if (!c.usable() || c.inlier_count < cfg.tau_in) continue;
    best_rmse = std::min(best_rmse, c.rmse);
  }
  if (best_rmse > tau_rmse_at(cfg, distance_traveled)) return std::nullopt;

  const double band = (1.0 + cfg.alpha) * best_rmse;
  for (const auto& c : candidates) {
    if (!c.usable() || c.inlier_count < cfg.tau_in || c.rmse > band) continue;
    if (!best || c.inlier_count > best->inlier_count ||
        (c.inlier_count == best->inlier_count &&
         (c.rmse < best->rmse || (c.rmse == best->rmse && c.submap_id < best->submap_id))))
      best = &c;
  }
  if (!best) return std::nullopt;

  detail::accept(state, *best, Mode::GlobalSearch, distance_traveled, timestamp);
  return *best;
}

/// Guided-relocalization acceptance of one candidate against the current
/// transform. e_cur is the current transform's RMSE recomputed on the same
/// evaluation window the candidate was scored on. All three gates must pass:
///   1. the two RMSE values differ by more than delta,
///   2. the candidate is not worse than (1+alpha) of the current RMSE,
///   3. the candidate transform stays within the drift-loosened translation
///      and rotation similarity bounds.
/// Returns true and updates state on acceptance; rejection leaves state
/// untouched.
inline bool guided_relocalize(LocalizerState& state, const CandidateRegistration& candidate,
                              double e_cur, const PipelineConfig& cfg, double distance_traveled,
                              double timestamp = 0.0) {
  if (state.mode != Mode::Guided || !state.t_cur)
    throw std::logic_error("guided_relocalize requires Guided mode");
  if (!candidate.usable()) return false;

  const double e_cand = candidate.rmse;
  if (!(std::abs(e_cand - e_cur) > cfg.delta)) return false;
  if (!(e_cand <= (1.0 + cfg.alpha) * e_cur)) return false;

  const double dist_since = std::max(0.0, distance_traveled - state.distance_at_last_accept);
  const auto [trans_gap, rot_gap] = transform_distance(*candidate.transform, *state.t_cur);
  const double trans_bound =
      cfg.translation_similarity_base + cfg.translation_similarity_growth * dist_since;
  const double rot_bound =
      cfg.rotation_similarity_base + cfg.rotation_similarity_growth * dist_since;
  if (trans_gap > trans_bound || rot_gap > rot_bound) return false;

  detail::accept(state, candidate, Mode::Guided, distance_traveled, timestamp);
  return true;
}

/// Vehicle pose in the reference frame: compose(t_cur, local_pose).
inline RigidTransform current_global_pose(const LocalizerState& state,
                                          const RigidTransform& local_pose) {
  if (state.mode != Mode::Guided || !state.t_cur) throw NotLocalized();
  return compose(*state.t_cur, local_pose);
}

}  // namespace semloc
