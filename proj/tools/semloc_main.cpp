// Command-line front end: scenario simulation, localization runs on map /
// observation / odometry files, and run evaluation against ground truth.
//
// Exit codes: 0 success (localize: at least one accepted registration),
//             2 localize completed without ever localizing,
//             1 input, parse, or configuration errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "semloc/io.hpp"
#include "semloc/pipeline.hpp"
#include "semloc/report.hpp"
#include "semloc/simulator.hpp"

namespace fs = std::filesystem;
using namespace semloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNeverLocalized = 2;

struct LocalizeOptions {
  std::string scenario_path;
  std::string ref_path, obs_path, odom_path, gt_path;
  std::string run_dir;
  std::string config_path, profile;
  std::string report_path, events_path, estimates_path;
  std::optional<std::uint64_t> seed_override;
  bool in_2d = false;
};

PipelineConfig load_config(const std::string& config_path, const std::string& profile) {
  if (!config_path.empty()) return io::read_config(config_path);
  if (!profile.empty()) return io::config_profile(profile);
  return PipelineConfig{};
}

io::ClassRegistry registry_from(const std::vector<std::string>& names) {
  return io::ClassRegistry{names};
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override) {
  ScenarioSpec spec = io::read_scenario_spec(spec_path);
  if (seed_override) spec.seed = *seed_override;
  const ScenarioRun run = generate(spec);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const auto classes = registry_from(spec.class_names);
  io::write_scenario_spec(dir / "scenario.txt", spec);
  io::write_map_file(dir / "ref_map.txt", run.reference_map, classes);
  io::write_observations(dir / "observations.txt", {run.timestamps, run.observation_batches},
                         classes);
  io::write_trajectory(dir / "odometry.txt", run.odometry);
  io::write_ground_truth(dir / "ground_truth.txt", run);
  std::cout << "wrote scenario (" << run.reference_map.size() << " reference objects, "
            << run.observation_batches.size() << " steps) to " << out_dir << "\n";
  return kExitOk;
}

int cmd_localize(const LocalizeOptions& opt) {
  PipelineConfig cfg = load_config(opt.config_path, opt.profile);

  PipelineInput input;
  std::vector<double> timestamps;
  std::optional<io::GroundTruth> gt;

  if (!opt.scenario_path.empty()) {
    ScenarioSpec spec = io::read_scenario_spec(opt.scenario_path);
    if (opt.seed_override) spec.seed = *opt.seed_override;
    const ScenarioRun run = generate(spec);
    input = pipeline_input_from(run);
    timestamps = run.timestamps;
    gt = io::GroundTruth{run.true_alignment, run.timestamps, run.ground_truth_poses};
  } else {
    fs::path ref = opt.ref_path, obs = opt.obs_path, odom = opt.odom_path, gtp = opt.gt_path;
    if (!opt.run_dir.empty()) {
      const fs::path dir(opt.run_dir);
      if (ref.empty()) ref = dir / "ref_map.txt";
      if (obs.empty()) obs = dir / "observations.txt";
      if (odom.empty()) odom = dir / "odometry.txt";
      if (gtp.empty() && fs::exists(dir / "ground_truth.txt")) gtp = dir / "ground_truth.txt";
    }
    if (ref.empty() || obs.empty() || odom.empty())
      throw std::invalid_argument("localize needs --scenario, --run, or --ref/--obs/--odom");
    auto [map, map_classes] = io::read_map_file(ref);
    auto [stream, obs_classes] = io::read_observations(obs);
    if (map_classes.names != obs_classes.names)
      throw std::invalid_argument("reference map and observation class lists differ");
    input.reference_map = std::move(map);
    input.observation_batches = std::move(stream.batches);
    timestamps = std::move(stream.timestamps);
    input.odometry = io::read_trajectory(odom);
    if (!gtp.empty()) gt = io::read_ground_truth(gtp);
  }

  if (input.observation_batches.size() != input.odometry.size())
    throw std::invalid_argument("observation and odometry streams have different lengths");

  const PipelineResult result = run_pipeline(input, cfg);

  std::optional<RunMetrics> metrics;
  if (gt) {
    ScenarioRun run;
    run.reference_map = input.reference_map;
    run.observation_batches = input.observation_batches;
    run.odometry = input.odometry;
    run.timestamps = timestamps;
    run.ground_truth_poses = gt->poses;
    run.true_alignment = gt->alignment;
    metrics = evaluate_run(run, result.localizer.event_log, result.trail, opt.in_2d);
  }

  const RunReport report = make_report(cfg, result, metrics ? &*metrics : nullptr);

  fs::path report_path = opt.report_path;
  if (report_path.empty())
    report_path = opt.run_dir.empty() ? fs::path("report.txt") : fs::path(opt.run_dir) / "report.txt";
  io::write_report(report_path, report);

  const fs::path base = report_path.parent_path();
  fs::path events_path = opt.events_path;
  if (events_path.empty()) events_path = base / "events.txt";
  io::write_events(events_path, result.localizer.event_log);
  fs::path estimates_path = opt.estimates_path;
  if (estimates_path.empty()) estimates_path = base / "estimates.txt";
  io::write_estimates(estimates_path, timestamps, result.trail);

  if (!report.localized) {
    std::cout << "never localized (" << input.observation_batches.size() << " steps, map size "
              << result.final_map_size << "); report at " << report_path.string() << "\n";
    return kExitNeverLocalized;
  }
  std::cout << "localized: " << report.event_count << " events";
  if (report.mean_position_error)
    std::cout << ", mean event position error " << io::fmt(*report.mean_position_error) << " m";
  std::cout << "; report at " << report_path.string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& run_dir, const std::string& report_path_arg,
                 const std::string& config_path, const std::string& profile, bool ablation,
                 bool in_2d, const std::string& series_path_arg) {
  const fs::path dir(run_dir);
  auto [stream, classes] = io::read_observations(dir / "observations.txt");
  auto [ref_map, ref_classes] = io::read_map_file(dir / "ref_map.txt");

  ScenarioRun run;
  run.reference_map = std::move(ref_map);
  run.observation_batches = std::move(stream.batches);
  run.timestamps = std::move(stream.timestamps);
  run.odometry = io::read_trajectory(dir / "odometry.txt");

  const auto events = io::read_events(dir / "events.txt");
  auto [est_times, trail] = io::read_estimates(dir / "estimates.txt");

  std::optional<RunMetrics> metrics;
  const bool have_gt = fs::exists(dir / "ground_truth.txt");
  if (have_gt) {
    const io::GroundTruth gt = io::read_ground_truth(dir / "ground_truth.txt");
    run.ground_truth_poses = gt.poses;
    run.true_alignment = gt.alignment;
    metrics = evaluate_run(run, events, trail, in_2d);
  }

  PipelineConfig cfg;
  if (!config_path.empty() || !profile.empty()) {
    cfg = load_config(config_path, profile);
  } else if (fs::exists(dir / "report.txt")) {
    cfg = io::read_report(dir / "report.txt").config;  // echo the run's own config
  }

  RunReport report;
  report.config = cfg;
  report.localized = !events.empty();
  report.event_count = events.size();
  for (std::size_t i = 0; i < events.size(); ++i) {
    RunReport::EventRecord rec;
    rec.timestamp = events[i].timestamp;
    rec.mode = events[i].mode;
    rec.inlier_count = events[i].inlier_count;
    rec.rmse = events[i].rmse;
    if (metrics && i < metrics->event_position_errors.size()) {
      rec.position_error = metrics->event_position_errors[i];
      rec.orientation_error = metrics->event_orientation_errors[i];
    }
    report.events.push_back(rec);
  }
  if (metrics && metrics->localized) {
    report.distance_to_localize = metrics->distance_to_localize;
    report.objects_to_localize = metrics->objects_to_localize;
    report.mean_position_error = metrics->mean_event_position_error;
    report.median_position_error = metrics->median_event_position_error;
    report.max_position_error = metrics->max_event_position_error;
    report.mean_orientation_error = metrics->mean_event_orientation_error;
    report.mean_post_localization_error = metrics->mean_post_localization_error;
    report.mean_post_localization_error_global_only =
        metrics->mean_post_localization_error_global_only;
  }

  fs::path report_path =
      report_path_arg.empty() ? dir / "evaluation.txt" : fs::path(report_path_arg);
  io::write_report(report_path, report);

  if (metrics && metrics->localized) {
    fs::path series_path =
        series_path_arg.empty() ? dir / "error_series.txt" : fs::path(series_path_arg);
    auto out = io::detail::open_out(series_path);
    out << "semloc_error_series v1\n";
    out << "columns distance error_with_relocalization"
        << (ablation ? " error_global_only" : "") << "\n";
    out << "count " << metrics->error_series.size() << "\n";
    for (const auto& row : metrics->error_series) {
      out << io::fmt(row[0]) << " " << io::fmt(row[1]);
      if (ablation) out << " " << io::fmt(row[2]);
      out << "\n";
    }
  }

  if (!have_gt)
    std::cout << "no ground truth: report restricted to event records\n";
  std::cout << "evaluation report at " << report_path.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semloc: global localization of semantic object maps"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a deterministic scenario into a directory");
  std::string sim_spec, sim_out;
  std::optional<std::uint64_t> sim_seed;
  sim->add_option("--spec", sim_spec, "scenario spec file")->required();
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->add_option("--seed", sim_seed, "override the spec seed");

  // localize
  auto* loc = app.add_subcommand("localize", "run the localization pipeline");
  LocalizeOptions lopt;
  loc->add_option("--scenario", lopt.scenario_path, "scenario spec to simulate and localize");
  loc->add_option("--run", lopt.run_dir, "run directory with ref_map/observations/odometry files");
  loc->add_option("--ref", lopt.ref_path, "reference map file");
  loc->add_option("--obs", lopt.obs_path, "observations file");
  loc->add_option("--odom", lopt.odom_path, "odometry trajectory file");
  loc->add_option("--ground-truth", lopt.gt_path, "ground truth file (enables error stats)");
  loc->add_option("--config", lopt.config_path, "pipeline config file");
  loc->add_option("--profile", lopt.profile, "config profile: kitti, katwijk, katwijk_sparse");
  loc->add_option("--report", lopt.report_path, "report output path");
  loc->add_option("--events-out", lopt.events_path, "event log output path");
  loc->add_option("--estimates-out", lopt.estimates_path, "per-step estimates output path");
  loc->add_option("--seed", lopt.seed_override, "override scenario seed");
  loc->add_flag("--2d", lopt.in_2d, "report errors in 2D (drop z)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score a finished run against ground truth");
  std::string ev_run, ev_report, ev_config, ev_profile, ev_series;
  bool ev_ablation = false, ev_2d = false;
  ev->add_option("--run", ev_run, "run directory")->required();
  ev->add_option("--report", ev_report, "evaluation report output path");
  ev->add_option("--config", ev_config, "pipeline config file (for the report echo)");
  ev->add_option("--profile", ev_profile, "config profile (for the report echo)");
  ev->add_option("--series-out", ev_series, "error-vs-distance series output path");
  ev->add_flag("--ablation", ev_ablation, "emit the global-only replay series as well");
  ev->add_flag("--2d", ev_2d, "report errors in 2D (drop z)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_spec, sim_out, sim_seed);
    if (loc->parsed()) return cmd_localize(lopt);
    if (ev->parsed())
      return cmd_evaluate(ev_run, ev_report, ev_config, ev_profile, ev_ablation, ev_2d, ev_series);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
