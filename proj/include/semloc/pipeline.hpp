#pragma once

#include <future>
#include <optional>
#include <unordered_map>
#include <vector>

#include "semloc/localizer.hpp"
#include "semloc/map_manager.hpp"
#include "semloc/registration.hpp"
#include "semloc/simulator.hpp"
#include "semloc/types.hpp"

namespace semloc {

struct PipelineInput {
  ObjectMap reference_map;
  std::vector<std::vector<SemanticObject>> observation_batches;
  std::vector<std::pair<double, RigidTransform>> odometry;
};

inline PipelineInput pipeline_input_from(const ScenarioRun& run) {
  return {run.reference_map, run.observation_batches, run.odometry};
}

struct PipelineResult {
  LocalizerState localizer;
  std::vector<EstimateTrailEntry> trail;
  double distance_traveled = 0.0;
  std::size_t final_map_size = 0;
};

namespace detail {

inline std::vector<CandidateRegistration> register_all_submaps(
    const std::vector<ObjectMap>& submaps, const ObjectMap& window, const ObjectMap& eval_window,
    const PipelineConfig& cfg) {
  std::vector<CandidateRegistration> out(submaps.size());
  if (cfg.parallel_submaps && submaps.size() > 1) {
    std::vector<std::future<CandidateRegistration>> jobs;
    jobs.reserve(submaps.size());
    for (std::size_t s = 0; s < submaps.size(); ++s)
      jobs.push_back(std::async(std::launch::async, [&, s] {
        return register_submap(submaps[s], window, cfg, {}, &eval_window, static_cast<int>(s));
      }));
    for (std::size_t s = 0; s < submaps.size(); ++s) out[s] = jobs[s].get();  // in submap order
  } else {
    for (std::size_t s = 0; s < submaps.size(); ++s)
      out[s] = register_submap(submaps[s], window, cfg, {}, &eval_window, static_cast<int>(s));
  }
  return out;
}

/// Resolves the stored inlier id pairs onto the current restricted reference
/// map and window; pairs whose objects dropped out of either map are skipped.
inline std::vector<Association> resolve_prior(const std::vector<IdPair>& ids,
                                              const ObjectMap& ref, const ObjectMap& window) {
  std::unordered_map<ObjectId, int> ref_index, veh_index;
  for (std::size_t i = 0; i < ref.size(); ++i) ref_index[ref[i].id] = static_cast<int>(i);
  for (std::size_t i = 0; i < window.size(); ++i) veh_index[window[i].id] = static_cast<int>(i);
  std::vector<Association> prior;
  for (const auto& [rid, vid] : ids) {
    auto ri = ref_index.find(rid);
    auto vi = veh_index.find(vid);
    if (ri != ref_index.end() && vi != veh_index.end())
      prior.push_back({ri->second, vi->second});
  }
  return prior;
}

}  // namespace detail

/// Runs the full localization pipeline over an observation stream in
/// timestamp order: fuse -> window -> register (all submaps in global mode,
/// restricted reference in guided mode) -> accept/reject.
inline PipelineResult run_pipeline(const PipelineInput& in, const PipelineConfig& cfg) {
  cfg.validate();
  if (in.observation_batches.size() != in.odometry.size())
    throw std::invalid_argument("observation batches and odometry must have equal length");

  const std::vector<ObjectMap> submaps =
      split_submaps(in.reference_map, cfg.k, cfg.submap_overlap_fraction);

  VehicleMapState veh;
  PipelineResult res;

  for (std::size_t step = 0; step < in.observation_batches.size(); ++step) {
    const auto& [timestamp, pose] = in.odometry[step];
    record_odometry(veh, timestamp, pose);
    fuse_observations(veh, in.observation_batches[step], cfg.fusion_radius);

    if (step % cfg.register_period == 0) {
      if (res.localizer.mode == Mode::GlobalSearch) {
        const ObjectMap window = recent_window(veh, cfg.r);
        if (window.size() >= cfg.tau_in) {
          const ObjectMap eval_window = recent_window(veh, kUnlimited);  // full vehicle map
          const auto candidates =
              detail::register_all_submaps(submaps, window, eval_window, cfg);
          global_localize(res.localizer, candidates, cfg, veh.distance_traveled, timestamp);
        }
      } else {
        const ObjectMap window = recent_window(veh, cfg.r);
        const ObjectMap eval_window = recent_window(veh, cfg.r_prime);
        const ObjectMap restricted = restrict_reference(in.reference_map, *res.localizer.t_cur,
                                                        window, cfg.restrict_margin);
        if (!restricted.empty() && window.size() >= 3) {
          const auto prior =
              detail::resolve_prior(res.localizer.last_inlier_ids, restricted, window);
          const auto cand = register_submap(restricted, window, cfg, prior, &eval_window, 0);
          if (cand.usable()) {
            try {
              const double e_cur = compute_rmse(*res.localizer.t_cur, eval_window, restricted,
                                                cfg.rmse_class_filter);
              guided_relocalize(res.localizer, cand, e_cur, cfg, veh.distance_traveled,
                                timestamp);
            } catch (const NoScoreableObjects&) {
              // current transform cannot be scored here; wait for more data
            }
          }
        }
      }
    }

    res.trail.push_back({res.localizer.t_cur, veh.full_map.size()});
  }

  res.distance_traveled = veh.distance_traveled;
  res.final_map_size = veh.full_map.size();
  return res;
}

}  // namespace semloc
