#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "semloc/geometry.hpp"
#include "semloc/localizer.hpp"
#include "semloc/simulator.hpp"
#include "semloc/types.hpp"

namespace semloc {

struct ParseError : std::runtime_error {
  ParseError(const std::string& file, std::size_t line, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message) {}
};

namespace io {

/// Shortest representation that round-trips a double exactly.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_transform(const RigidTransform& t) {
  std::string out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out += fmt(t.rotation(r, c)) + " ";
  out += fmt(t.translation.x()) + " " + fmt(t.translation.y()) + " " + fmt(t.translation.z());
  return out;
}

namespace detail {

class LineReader {
 public:
  LineReader(const std::filesystem::path& path) : file_(path.string()), in_(path) {
    if (!in_) throw std::runtime_error("cannot open " + file_);
  }

  /// Next non-blank, non-comment line split into tokens; nullopt at EOF.
  std::optional<std::vector<std::string>> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      std::vector<std::string> tokens;
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      if (tokens.empty() || tokens[0][0] == '#') continue;
      return tokens;
    }
    return std::nullopt;
  }

  std::vector<std::string> require(const std::string& what) {
    auto t = next();
    if (!t) fail("unexpected end of file, expected " + what);
    return *t;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(file_, line_, message);
  }

  double to_double(const std::string& s) const {
    double v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      fail("expected a number, got '" + s + "'");
    return v;
  }

  long long to_int(const std::string& s) const {
    long long v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      fail("expected an integer, got '" + s + "'");
    return v;
  }

  std::size_t to_count(const std::string& s) const {
    if (s == "unlimited") return kUnlimited;
    const long long v = to_int(s);
    if (v < 0) fail("expected a nonnegative count, got '" + s + "'");
    return static_cast<std::size_t>(v);
  }

  RigidTransform to_transform(const std::vector<std::string>& tokens, std::size_t offset) const {
    if (tokens.size() < offset + 12) fail("expected 12 transform values");
    RigidTransform t;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t.rotation(r, c) = to_double(tokens[offset + r * 3 + c]);
    for (int i = 0; i < 3; ++i) t.translation[i] = to_double(tokens[offset + 9 + i]);
    return t;
  }

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

inline void expect_header(LineReader& r, const std::string& magic) {
  const auto t = r.require("header");
  if (t.size() != 2 || t[0] != magic || t[1] != "v1")
    r.fail("expected header '" + magic + " v1'");
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace detail

/// Class names in id order; maps between the numeric ids used in ObjectMap
/// and the names used in files.
struct ClassRegistry {
  std::vector<std::string> names;

  const std::string& name_of(ClassId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= names.size())
      throw std::out_of_range("unknown class id " + std::to_string(id));
    return names[id];
  }

  ClassId id_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<ClassId>(i);
    throw std::out_of_range("unknown class name '" + name + "'");
  }
};

// ---------------------------------------------------------------- map files

inline void write_map_file(const std::filesystem::path& path, const ObjectMap& map,
                           const ClassRegistry& classes) {
  auto out = detail::open_out(path);
  out << "semloc_map v1\n";
  out << "frame " << (map.frame == Frame::ReferenceGlobal ? "reference" : "vehicle") << "\n";
  out << "classes";
  for (const auto& n : classes.names) out << " " << n;
  out << "\ncount " << map.size() << "\n";
  for (const auto& o : map.objects)
    out << o.id << " " << classes.name_of(o.class_id) << " " << fmt(o.centroid.x()) << " "
        << fmt(o.centroid.y()) << " " << fmt(o.centroid.z()) << "\n";
}

inline std::pair<ObjectMap, ClassRegistry> read_map_file(const std::filesystem::path& path) {
  detail::LineReader r(path);
  detail::expect_header(r, "semloc_map");
  ObjectMap map;
  ClassRegistry classes;

  auto frame = r.require("frame");
  if (frame.size() != 2 || frame[0] != "frame") r.fail("expected 'frame <tag>'");
  if (frame[1] == "reference")
    map.frame = Frame::ReferenceGlobal;
  else if (frame[1] == "vehicle")
    map.frame = Frame::VehicleLocal;
  else
    r.fail("unknown frame tag '" + frame[1] + "'");

  auto cls = r.require("classes");
  if (cls.empty() || cls[0] != "classes" || cls.size() < 2) r.fail("expected 'classes <names...>'");
  classes.names.assign(cls.begin() + 1, cls.end());

  auto cnt = r.require("count");
  if (cnt.size() != 2 || cnt[0] != "count") r.fail("expected 'count <n>'");
  const std::size_t n = r.to_count(cnt[1]);
  map.objects.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rec = r.require("object record");
    if (rec.size() != 5) r.fail("object record needs: id class x y z");
    SemanticObject o;
    o.id = static_cast<ObjectId>(r.to_int(rec[0]));
    try {
      o.class_id = classes.id_of(rec[1]);
    } catch (const std::out_of_range&) {
      r.fail("class '" + rec[1] + "' not in header class list");
    }
    o.centroid = {r.to_double(rec[2]), r.to_double(rec[3]), r.to_double(rec[4])};
    if (!o.finite()) r.fail("non-finite centroid");
    map.objects.push_back(o);
  }
  if (!map.ids_unique()) r.fail("duplicate object ids");
  return {map, classes};
}

// ---------------------------------------------------------- observation files

struct ObservationStream {
  std::vector<double> timestamps;
  std::vector<std::vector<SemanticObject>> batches;
};

inline void write_observations(const std::filesystem::path& path, const ObservationStream& obs,
                               const ClassRegistry& classes) {
  auto out = detail::open_out(path);
  out << "semloc_observations v1\nclasses";
  for (const auto& n : classes.names) out << " " << n;
  out << "\nbatches " << obs.batches.size() << "\n";
  for (std::size_t i = 0; i < obs.batches.size(); ++i) {
    out << "batch " << fmt(obs.timestamps[i]) << " " << obs.batches[i].size() << "\n";
    for (const auto& o : obs.batches[i])
      out << classes.name_of(o.class_id) << " " << fmt(o.centroid.x()) << " "
          << fmt(o.centroid.y()) << " " << fmt(o.centroid.z()) << "\n";
  }
}

inline std::pair<ObservationStream, ClassRegistry> read_observations(
    const std::filesystem::path& path) {
  detail::LineReader r(path);
  detail::expect_header(r, "semloc_observations");
  ObservationStream obs;
  ClassRegistry classes;

  auto cls = r.require("classes");
  if (cls.empty() || cls[0] != "classes" || cls.size() < 2) r.fail("expected 'classes <names...>'");
  classes.names.assign(cls.begin() + 1, cls.end());

  auto cnt = r.require("batches");
  if (cnt.size() != 2 || cnt[0] != "batches") r.fail("expected 'batches <n>'");
  const std::size_t n = r.to_count(cnt[1]);
  ObjectId next_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto head = r.require("batch header");
    if (head.size() != 3 || head[0] != "batch") r.fail("expected 'batch <t> <n>'");
    obs.timestamps.push_back(r.to_double(head[1]));
    const std::size_t m = r.to_count(head[2]);
    std::vector<SemanticObject> batch;
    batch.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
      auto rec = r.require("observation record");
      if (rec.size() != 4) r.fail("observation record needs: class x y z");
      SemanticObject o;
      try {
        o.class_id = classes.id_of(rec[0]);
      } catch (const std::out_of_range&) {
        r.fail("class '" + rec[0] + "' not in header class list");
      }
      o.centroid = {r.to_double(rec[1]), r.to_double(rec[2]), r.to_double(rec[3])};
      if (!o.finite()) r.fail("non-finite centroid");
      o.id = next_id++;
      batch.push_back(o);
    }
    obs.batches.push_back(std::move(batch));
  }
  return {obs, classes};
}

// ----------------------------------------------------------- trajectory files

inline void write_trajectory(const std::filesystem::path& path,
                             const std::vector<std::pair<double, RigidTransform>>& poses) {
  auto out = detail::open_out(path);
  out << "semloc_trajectory v1\ncount " << poses.size() << "\n";
  for (const auto& [t, pose] : poses) out << fmt(t) << " " << fmt_transform(pose) << "\n";
}

inline std::vector<std::pair<double, RigidTransform>> read_trajectory(
    const std::filesystem::path& path) {
  detail::LineReader r(path);
  detail::expect_header(r, "semloc_trajectory");
  auto cnt = r.require("count");
  if (cnt.size() != 2 || cnt[0] != "count") r.fail("expected 'count <n>'");
  const std::size_t n = r.to_count(cnt[1]);
  std::vector<std::pair<double, RigidTransform>> poses;
  poses.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rec = r.require("pose record");
    if (rec.size() != 13) r.fail("pose record needs: t + 12 transform values");
    poses.emplace_back(r.to_double(rec[0]), r.to_transform(rec, 1));
  }
  return poses;
}

// --------------------------------------------------------- ground truth files

struct GroundTruth {
  RigidTransform alignment;
  std::vector<double> timestamps;
  std::vector<RigidTransform> poses;
};

inline void write_ground_truth(const std::filesystem::path& path, const ScenarioRun& run) {
  auto out = detail::open_out(path);
  out << "semloc_ground_truth v1\n";
  out << "alignment " << fmt_transform(run.true_alignment) << "\n";
  out << "count " << run.ground_truth_poses.size() << "\n";
  for (std::size_t i = 0; i < run.ground_truth_poses.size(); ++i)
    out << fmt(run.timestamps[i]) << " " << fmt_transform(run.ground_truth_poses[i]) << "\n";
}

inline GroundTruth read_ground_truth(const std::filesystem::path& path) {
  detail::LineReader r(path);
  detail::expect_header(r, "semloc_ground_truth");
  GroundTruth gt;
  auto al = r.require("alignment");
  if (al.size() != 13 || al[0] != "alignment") r.fail("expected 'alignment <12 values>'");
  gt.alignment = r.to_transform(al, 1);
  auto cnt = r.require("count");
  if (cnt.size() != 2 || cnt[0] != "count") r.fail("expected 'count <n>'");
  const std::size_t n = r.to_count(cnt[1]);
  for (std::size_t i = 0; i < n; ++i) {
    auto rec = r.require("pose record");
    if (rec.size() != 13) r.fail("pose record needs: t + 12 transform values");
    gt.timestamps.push_back(r.to_double(rec[0]));
    gt.poses.push_back(r.to_transform(rec, 1));
  }
  return gt;
}

// -------------------------------------------------------------- estimate files

inline void write_estimates(const std::filesystem::path& path,
                            const std::vector<double>& timestamps,
                            const std::vector<EstimateTrailEntry>& trail) {
  auto out = detail::open_out(path);
  out << "semloc_estimates v1\ncount " << trail.size() << "\n";
  for (std::size_t i = 0; i < trail.size(); ++i) {
    out << fmt(timestamps[i]) << " " << trail[i].vehicle_map_size;
    if (trail[i].alignment)
      out << " 1 " << fmt_transform(*trail[i].alignment) << "\n";
    else
      out << " 0\n";
  }
}

inline std::pair<std::vector<double>, std::vector<EstimateTrailEntry>> read_estimates(
    const std::filesystem::path& path) {
  detail::LineReader r(path);
  detail::expect_header(r, "semloc_estimates");
  auto cnt = r.require("count");
  if (cnt.size() != 2 || cnt[0] != "count") r.fail("expected 'count <n>'");
  const std::size_t n = r.to_count(cnt[1]);
  std::vector<double> timestamps;
  std::vector<EstimateTrailEntry> trail;
  for (std::size_t i = 0; i < n; ++i) {
    auto rec = r.require("estimate record");
    if (rec.size() < 3) r.fail("estimate record needs: t map_size localized [transform]");
    timestamps.push_back(r.to_double(rec[0]));
    EstimateTrailEntry e;
    e.vehicle_map_size = r.to_count(rec[1]);
    const long long flag = r.to_int(rec[2]);
    if (flag == 1) {
      if (rec.size() != 15) r.fail("localized estimate record needs 12 transform values");
      e.alignment = r.to_transform(rec, 3);
    } else if (flag != 0 || rec.size() != 3) {
      r.fail("estimate record flag must be 0 or 1");
    }
    trail.push_back(e);
  }
  return {timestamps, trail};
}

// ---------------------------------------------------------------- event files

inline const char* mode_name(Mode m) { return m == Mode::GlobalSearch ? "global" : "guided"; }

inline void write_events(const std::filesystem::path& path,
                         const std::vector<LocalizationEvent>& events) {
  auto out = detail::open_out(path);
  out << "semloc_events v1\ncount " << events.size() << "\n";
  for (const auto& ev : events)
    out << fmt(ev.timestamp) << " " << mode_name(ev.mode) << " " << ev.inlier_count << " "
        << fmt(ev.rmse) << " " << fmt_transform(ev.transform) << "\n";
}

inline std::vector<LocalizationEvent> read_events(const std::filesystem::path& path) {
  detail::LineReader r(path);
  detail::expect_header(r, "semloc_events");
  auto cnt = r.require("count");
  if (cnt.size() != 2 || cnt[0] != "count") r.fail("expected 'count <n>'");
  const std::size_t n = r.to_count(cnt[1]);
  std::vector<LocalizationEvent> events;
  for (std::size_t i = 0; i < n; ++i) {
    auto rec = r.require("event record");
    if (rec.size() != 16) r.fail("event record needs: t mode inliers rmse + 12 transform values");
    LocalizationEvent ev;
    ev.timestamp = r.to_double(rec[0]);
    if (rec[1] == "global")
      ev.mode = Mode::GlobalSearch;
    else if (rec[1] == "guided")
      ev.mode = Mode::Guided;
    else
      r.fail("unknown mode '" + rec[1] + "'");
    ev.inlier_count = r.to_count(rec[2]);
    ev.rmse = r.to_double(rec[3]);
    ev.transform = r.to_transform(rec, 4);
    events.push_back(ev);
  }
  return events;
}

// -------------------------------------------------------------- scenario files

inline void write_scenario_spec(const std::filesystem::path& path, const ScenarioSpec& spec) {
  auto out = detail::open_out(path);
  out << "semloc_scenario v1\n";
  out << "seed " << spec.seed << "\n";
  out << "ref_object_count " << spec.ref_object_count << "\n";
  out << "area " << fmt(spec.area_width) << " " << fmt(spec.area_height) << "\n";
  out << "classes";
  for (const auto& n : spec.class_names) out << " " << n;
  out << "\nclass_weights";
  for (double w : spec.class_weights) out << " " << fmt(w);
  out << "\n";
  const char* pattern = "loop";
  switch (spec.trajectory.pattern) {
    case TrajectoryPattern::Loop: pattern = "loop"; break;
    case TrajectoryPattern::OutAndBack: pattern = "out_and_back"; break;
    case TrajectoryPattern::Grid: pattern = "grid"; break;
    case TrajectoryPattern::Waypoints: pattern = "waypoints"; break;
  }
  out << "trajectory " << pattern << "\n";
  if (spec.trajectory.pattern == TrajectoryPattern::Waypoints) {
    out << "waypoints";
    for (const auto& w : spec.trajectory.waypoints) out << " " << fmt(w.x()) << " " << fmt(w.y());
    out << "\n";
  }
  out << "step_length " << fmt(spec.trajectory.step_length) << "\n";
  out << "laps " << spec.trajectory.laps << "\n";
  out << "sensor_range " << fmt(spec.sensor_range) << "\n";
  out << "centroid_noise_sigma " << fmt(spec.centroid_noise_sigma) << "\n";
  out << "outlier_fraction " << fmt(spec.outlier_fraction) << "\n";
  out << "missing_fraction " << fmt(spec.missing_fraction) << "\n";
  out << "drift_rate " << fmt(spec.drift_rate) << "\n";
  const char* view = spec.viewpoint_mode == ViewpointMode::Same ? "same"
                     : spec.viewpoint_mode == ViewpointMode::Reversed ? "reversed"
                                                                      : "aerial_jitter";
  out << "viewpoint_mode " << view << "\n";
  out << "min_object_separation " << fmt(spec.min_object_separation) << "\n";
  out << "outlier_clearance " << fmt(spec.outlier_clearance) << "\n";
}

inline ScenarioSpec read_scenario_spec(const std::filesystem::path& path) {
  detail::LineReader r(path);
  detail::expect_header(r, "semloc_scenario");
  ScenarioSpec spec;
  while (auto tokens = r.next()) {
    const auto& t = *tokens;
    const std::string& key = t[0];
    auto one = [&](const char* what) -> const std::string& {
      if (t.size() != 2) r.fail(std::string("'") + key + "' needs one " + what);
      return t[1];
    };
    if (key == "seed") spec.seed = static_cast<std::uint64_t>(r.to_int(one("integer")));
    else if (key == "ref_object_count") spec.ref_object_count = r.to_count(one("count"));
    else if (key == "area") {
      if (t.size() != 3) r.fail("'area' needs width and height");
      spec.area_width = r.to_double(t[1]);
      spec.area_height = r.to_double(t[2]);
    } else if (key == "classes") {
      if (t.size() < 2) r.fail("'classes' needs at least one name");
      spec.class_names.assign(t.begin() + 1, t.end());
    } else if (key == "class_weights") {
      spec.class_weights.clear();
      for (std::size_t i = 1; i < t.size(); ++i) spec.class_weights.push_back(r.to_double(t[i]));
    } else if (key == "trajectory") {
      const std::string& p = one("pattern");
      if (p == "loop") spec.trajectory.pattern = TrajectoryPattern::Loop;
      else if (p == "out_and_back") spec.trajectory.pattern = TrajectoryPattern::OutAndBack;
      else if (p == "grid") spec.trajectory.pattern = TrajectoryPattern::Grid;
      else if (p == "waypoints") spec.trajectory.pattern = TrajectoryPattern::Waypoints;
      else r.fail("unknown trajectory pattern '" + p + "'");
    } else if (key == "waypoints") {
      if (t.size() < 5 || (t.size() - 1) % 2 != 0) r.fail("'waypoints' needs x y pairs (>= 2)");
      spec.trajectory.waypoints.clear();
      for (std::size_t i = 1; i + 1 < t.size(); i += 2)
        spec.trajectory.waypoints.push_back({r.to_double(t[i]), r.to_double(t[i + 1])});
    } else if (key == "step_length") spec.trajectory.step_length = r.to_double(one("number"));
    else if (key == "laps") spec.trajectory.laps = r.to_count(one("count"));
    else if (key == "sensor_range") spec.sensor_range = r.to_double(one("number"));
    else if (key == "centroid_noise_sigma") spec.centroid_noise_sigma = r.to_double(one("number"));
    else if (key == "outlier_fraction") spec.outlier_fraction = r.to_double(one("number"));
    else if (key == "missing_fraction") spec.missing_fraction = r.to_double(one("number"));
    else if (key == "drift_rate") spec.drift_rate = r.to_double(one("number"));
    else if (key == "viewpoint_mode") {
      const std::string& v = one("mode");
      if (v == "same") spec.viewpoint_mode = ViewpointMode::Same;
      else if (v == "reversed") spec.viewpoint_mode = ViewpointMode::Reversed;
      else if (v == "aerial_jitter") spec.viewpoint_mode = ViewpointMode::AerialJitter;
      else r.fail("unknown viewpoint mode '" + v + "'");
    } else if (key == "min_object_separation") spec.min_object_separation = r.to_double(one("number"));
    else if (key == "outlier_clearance") spec.outlier_clearance = r.to_double(one("number"));
    else r.fail("unknown scenario key '" + key + "'");
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------- config files

inline void write_config(std::ostream& out, const PipelineConfig& cfg) {
  auto count = [](std::size_t v) {
    return v == kUnlimited ? std::string("unlimited") : std::to_string(v);
  };
  out << "semloc_config v1\n";
  out << "epsilon " << fmt(cfg.epsilon) << "\n";
  out << "tau_in " << cfg.tau_in << "\n";
  out << "tau_rmse_base " << fmt(cfg.tau_rmse_base) << "\n";
  out << "tau_rmse_growth " << fmt(cfg.tau_rmse_growth) << "\n";
  out << "alpha " << fmt(cfg.alpha) << "\n";
  out << "delta " << fmt(cfg.delta) << "\n";
  out << "r " << count(cfg.r) << "\n";
  out << "r_prime " << count(cfg.r_prime) << "\n";
  out << "k " << cfg.k << "\n";
  out << "submap_overlap_fraction " << fmt(cfg.submap_overlap_fraction) << "\n";
  out << "fusion_radius " << fmt(cfg.fusion_radius) << "\n";
  out << "translation_similarity_base " << fmt(cfg.translation_similarity_base) << "\n";
  out << "rotation_similarity_base " << fmt(cfg.rotation_similarity_base) << "\n";
  out << "translation_similarity_growth " << fmt(cfg.translation_similarity_growth) << "\n";
  out << "rotation_similarity_growth " << fmt(cfg.rotation_similarity_growth) << "\n";
  out << "restrict_margin " << fmt(cfg.restrict_margin) << "\n";
  out << "rmse_class_filter";
  if (cfg.rmse_class_filter)
    for (ClassId c : *cfg.rmse_class_filter) out << " " << c;
  else
    out << " -";
  out << "\n";
  out << "register_period " << cfg.register_period << "\n";
  out << "clique_node_budget " << cfg.clique_node_budget << "\n";
  out << "parallel_submaps " << (cfg.parallel_submaps ? "true" : "false") << "\n";
}

inline PipelineConfig config_profile(const std::string& name) {
  if (name == "kitti") return PipelineConfig::kitti_profile();
  if (name == "katwijk") return PipelineConfig::katwijk_profile();
  if (name == "katwijk_sparse") return PipelineConfig::katwijk_sparse_profile();
  throw std::invalid_argument("unknown profile '" + name + "' (kitti, katwijk, katwijk_sparse)");
}

inline PipelineConfig parse_config_body(detail::LineReader& r, PipelineConfig cfg) {
  while (auto tokens = r.next()) {
    const auto& t = *tokens;
    const std::string& key = t[0];
    auto one = [&]() -> const std::string& {
      if (t.size() != 2) r.fail("'" + key + "' needs exactly one value");
      return t[1];
    };
    if (key == "profile") cfg = config_profile(one());
    else if (key == "epsilon") cfg.epsilon = r.to_double(one());
    else if (key == "tau_in") cfg.tau_in = r.to_count(one());
    else if (key == "tau_rmse_base") cfg.tau_rmse_base = r.to_double(one());
    else if (key == "tau_rmse_growth") cfg.tau_rmse_growth = r.to_double(one());
    else if (key == "alpha") cfg.alpha = r.to_double(one());
    else if (key == "delta") cfg.delta = r.to_double(one());
    else if (key == "r") cfg.r = r.to_count(one());
    else if (key == "r_prime") cfg.r_prime = r.to_count(one());
    else if (key == "k") cfg.k = r.to_count(one());
    else if (key == "submap_overlap_fraction") cfg.submap_overlap_fraction = r.to_double(one());
    else if (key == "fusion_radius") cfg.fusion_radius = r.to_double(one());
    else if (key == "translation_similarity_base") cfg.translation_similarity_base = r.to_double(one());
    else if (key == "rotation_similarity_base") cfg.rotation_similarity_base = r.to_double(one());
    else if (key == "translation_similarity_growth") cfg.translation_similarity_growth = r.to_double(one());
    else if (key == "rotation_similarity_growth") cfg.rotation_similarity_growth = r.to_double(one());
    else if (key == "restrict_margin") cfg.restrict_margin = r.to_double(one());
    else if (key == "rmse_class_filter") {
      if (t.size() == 2 && t[1] == "-") {
        cfg.rmse_class_filter.reset();
      } else {
        std::set<ClassId> filter;
        for (std::size_t i = 1; i < t.size(); ++i)
          filter.insert(static_cast<ClassId>(r.to_int(t[i])));
        cfg.rmse_class_filter = std::move(filter);
      }
    } else if (key == "register_period") cfg.register_period = r.to_count(one());
    else if (key == "clique_node_budget") cfg.clique_node_budget = r.to_count(one());
    else if (key == "parallel_submaps") {
      const std::string& v = one();
      if (v == "true") cfg.parallel_submaps = true;
      else if (v == "false") cfg.parallel_submaps = false;
      else r.fail("'parallel_submaps' must be true or false");
    } else if (key == "[events]" || key == "[summary]") {
      break;  // config section embedded in a report
    } else r.fail("unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

inline PipelineConfig read_config(const std::filesystem::path& path) {
  detail::LineReader r(path);
  detail::expect_header(r, "semloc_config");
  return parse_config_body(r, PipelineConfig{});
}

}  // namespace io
}  // namespace semloc
