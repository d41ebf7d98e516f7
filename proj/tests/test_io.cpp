#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "semloc/io.hpp"
#include "semloc/pipeline.hpp"
#include "semloc/report.hpp"

using namespace semloc;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("semloc_io_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()
                                            ->current_test_info()
                                            ->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path dir_;
};

ScenarioSpec demo_spec(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.seed = seed;
  spec.ref_object_count = 50;
  spec.area_width = 110.0;
  spec.area_height = 80.0;
  spec.sensor_range = 30.0;
  spec.centroid_noise_sigma = 0.05;
  spec.trajectory.step_length = 3.0;
  return spec;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_F(IoTest, MapFileRoundTripIsExact) {
  const ScenarioRun run = generate(demo_spec(3));
  const io::ClassRegistry classes{{"rock_small", "rock_medium", "rock_large"}};
  io::write_map_file(path("map.txt"), run.reference_map, classes);
  const auto [map, classes_back] = io::read_map_file(path("map.txt"));
  EXPECT_EQ(classes_back.names, classes.names);
  ASSERT_EQ(map.size(), run.reference_map.size());
  EXPECT_EQ(map.frame, Frame::ReferenceGlobal);
  for (std::size_t i = 0; i < map.size(); ++i) {
    EXPECT_EQ(map[i].id, run.reference_map[i].id);
    EXPECT_EQ(map[i].class_id, run.reference_map[i].class_id);
    EXPECT_EQ(map[i].centroid, run.reference_map[i].centroid);  // bit-exact
  }
}

TEST_F(IoTest, ObservationsRoundTrip) {
  const ScenarioRun run = generate(demo_spec(5));
  const io::ClassRegistry classes{{"rock_small", "rock_medium", "rock_large"}};
  io::write_observations(path("obs.txt"), {run.timestamps, run.observation_batches}, classes);
  const auto [stream, classes_back] = io::read_observations(path("obs.txt"));
  ASSERT_EQ(stream.batches.size(), run.observation_batches.size());
  EXPECT_EQ(stream.timestamps, run.timestamps);
  for (std::size_t i = 0; i < stream.batches.size(); ++i) {
    ASSERT_EQ(stream.batches[i].size(), run.observation_batches[i].size());
    for (std::size_t j = 0; j < stream.batches[i].size(); ++j) {
      EXPECT_EQ(stream.batches[i][j].centroid, run.observation_batches[i][j].centroid);
      EXPECT_EQ(stream.batches[i][j].class_id, run.observation_batches[i][j].class_id);
    }
  }
}

TEST_F(IoTest, TrajectoryRoundTripIsExact) {
  const ScenarioRun run = generate(demo_spec(7));
  io::write_trajectory(path("odom.txt"), run.odometry);
  const auto poses = io::read_trajectory(path("odom.txt"));
  ASSERT_EQ(poses.size(), run.odometry.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_EQ(poses[i].first, run.odometry[i].first);
    EXPECT_EQ(poses[i].second.rotation, run.odometry[i].second.rotation);
    EXPECT_EQ(poses[i].second.translation, run.odometry[i].second.translation);
  }
}

TEST_F(IoTest, GroundTruthRoundTrip) {
  const ScenarioRun run = generate(demo_spec(9));
  io::write_ground_truth(path("gt.txt"), run);
  const io::GroundTruth gt = io::read_ground_truth(path("gt.txt"));
  EXPECT_EQ(gt.alignment.rotation, run.true_alignment.rotation);
  EXPECT_EQ(gt.alignment.translation, run.true_alignment.translation);
  ASSERT_EQ(gt.poses.size(), run.ground_truth_poses.size());
  for (std::size_t i = 0; i < gt.poses.size(); ++i)
    EXPECT_EQ(gt.poses[i].translation, run.ground_truth_poses[i].translation);
}

TEST_F(IoTest, ScenarioSpecRoundTrip) {
  ScenarioSpec spec = demo_spec(11);
  spec.trajectory.pattern = TrajectoryPattern::Waypoints;
  spec.trajectory.waypoints = {{0.0, 0.0}, {50.0, 0.0}, {50.0, 40.0}};
  spec.outlier_fraction = 0.25;
  spec.viewpoint_mode = ViewpointMode::AerialJitter;
  io::write_scenario_spec(path("spec.txt"), spec);
  const ScenarioSpec back = io::read_scenario_spec(path("spec.txt"));
  EXPECT_EQ(back.seed, spec.seed);
  EXPECT_EQ(back.ref_object_count, spec.ref_object_count);
  EXPECT_EQ(back.area_width, spec.area_width);
  EXPECT_EQ(back.class_names, spec.class_names);
  EXPECT_EQ(back.class_weights, spec.class_weights);
  EXPECT_EQ(back.trajectory.pattern, spec.trajectory.pattern);
  ASSERT_EQ(back.trajectory.waypoints.size(), 3u);
  EXPECT_EQ(back.trajectory.waypoints[2], spec.trajectory.waypoints[2]);
  EXPECT_EQ(back.outlier_fraction, spec.outlier_fraction);
  EXPECT_EQ(back.viewpoint_mode, spec.viewpoint_mode);
}

TEST_F(IoTest, ConfigRoundTripIncludingUnlimitedAndFilter) {
  PipelineConfig cfg = PipelineConfig::katwijk_profile();
  cfg.rmse_class_filter = std::set<ClassId>{0, 2};
  {
    std::ofstream out(path("cfg.txt"));
    io::write_config(out, cfg);
  }
  const PipelineConfig back = io::read_config(path("cfg.txt"));
  EXPECT_EQ(back.epsilon, cfg.epsilon);
  EXPECT_EQ(back.tau_in, cfg.tau_in);
  EXPECT_EQ(back.r, kUnlimited);
  EXPECT_EQ(back.r_prime, kUnlimited);
  EXPECT_EQ(back.k, cfg.k);
  ASSERT_TRUE(back.rmse_class_filter.has_value());
  EXPECT_EQ(*back.rmse_class_filter, (std::set<ClassId>{0, 2}));
}

TEST_F(IoTest, ConfigProfileLine) {
  {
    std::ofstream out(path("cfg.txt"));
    out << "semloc_config v1\nprofile katwijk\ntau_in 6\n";
  }
  const PipelineConfig cfg = io::read_config(path("cfg.txt"));
  EXPECT_EQ(cfg.epsilon, 1.5);  // from the profile
  EXPECT_EQ(cfg.tau_in, 6u);    // overridden after the profile line
}

TEST_F(IoTest, ParseErrorsNameFileAndLine) {
  {
    std::ofstream out(path("bad.txt"));
    out << "semloc_map v1\nframe reference\nclasses a\ncount 1\n0 a nan_oops 2 3\n";
  }
  try {
    io::read_map_file(path("bad.txt"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("bad.txt"), std::string::npos);
    EXPECT_NE(what.find(":5:"), std::string::npos);
  }
}

TEST_F(IoTest, UnknownClassInRecordIsAnError) {
  {
    std::ofstream out(path("bad.txt"));
    out << "semloc_map v1\nframe reference\nclasses a b\ncount 1\n0 zzz 1 2 3\n";
  }
  EXPECT_THROW(io::read_map_file(path("bad.txt")), ParseError);
}

TEST_F(IoTest, EventsAndEstimatesRoundTrip) {
  const ScenarioRun run = generate(demo_spec(13));
  PipelineConfig cfg;
  cfg.tau_in = 10;
  cfg.r = 40;
  cfg.r_prime = 80;
  cfg.epsilon = 1.0;
  cfg.k = 1;
  const PipelineResult res = run_pipeline(pipeline_input_from(run), cfg);
  ASSERT_FALSE(res.localizer.event_log.empty());

  io::write_events(path("events.txt"), res.localizer.event_log);
  const auto events = io::read_events(path("events.txt"));
  ASSERT_EQ(events.size(), res.localizer.event_log.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(events[i].timestamp, res.localizer.event_log[i].timestamp);
    EXPECT_EQ(events[i].inlier_count, res.localizer.event_log[i].inlier_count);
    EXPECT_EQ(events[i].rmse, res.localizer.event_log[i].rmse);
    EXPECT_EQ(events[i].transform.rotation, res.localizer.event_log[i].transform.rotation);
  }

  io::write_estimates(path("est.txt"), run.timestamps, res.trail);
  const auto [times, trail] = io::read_estimates(path("est.txt"));
  ASSERT_EQ(trail.size(), res.trail.size());
  EXPECT_EQ(times, run.timestamps);
  for (std::size_t i = 0; i < trail.size(); ++i) {
    ASSERT_EQ(trail[i].alignment.has_value(), res.trail[i].alignment.has_value());
    EXPECT_EQ(trail[i].vehicle_map_size, res.trail[i].vehicle_map_size);
    if (trail[i].alignment)
      EXPECT_EQ(trail[i].alignment->translation, res.trail[i].alignment->translation);
  }
}

TEST_F(IoTest, ReportRoundTripAndSelfConsistency) {
  const ScenarioRun run = generate(demo_spec(15));
  PipelineConfig cfg;
  cfg.tau_in = 10;
  cfg.r = 40;
  cfg.r_prime = 80;
  cfg.epsilon = 1.0;
  cfg.k = 1;
  cfg.rmse_class_filter = std::set<ClassId>{0, 1, 2};
  const PipelineResult res = run_pipeline(pipeline_input_from(run), cfg);
  ASSERT_FALSE(res.localizer.event_log.empty());
  const RunMetrics metrics = evaluate_run(run, res.localizer.event_log, res.trail);
  const RunReport report = make_report(cfg, res, &metrics);
  io::write_report(path("report.txt"), report);
  const RunReport back = io::read_report(path("report.txt"));

  // config echo matches field for field
  EXPECT_EQ(back.config.epsilon, cfg.epsilon);
  EXPECT_EQ(back.config.tau_in, cfg.tau_in);
  EXPECT_EQ(back.config.tau_rmse_base, cfg.tau_rmse_base);
  EXPECT_EQ(back.config.tau_rmse_growth, cfg.tau_rmse_growth);
  EXPECT_EQ(back.config.alpha, cfg.alpha);
  EXPECT_EQ(back.config.delta, cfg.delta);
  EXPECT_EQ(back.config.r, cfg.r);
  EXPECT_EQ(back.config.r_prime, cfg.r_prime);
  EXPECT_EQ(back.config.k, cfg.k);
  EXPECT_EQ(back.config.fusion_radius, cfg.fusion_radius);
  EXPECT_EQ(back.config.rmse_class_filter, cfg.rmse_class_filter);
  EXPECT_EQ(back.config.parallel_submaps, cfg.parallel_submaps);

  // events preserved
  ASSERT_EQ(back.events.size(), report.events.size());
  for (std::size_t i = 0; i < back.events.size(); ++i) {
    EXPECT_EQ(back.events[i].timestamp, report.events[i].timestamp);
    EXPECT_EQ(back.events[i].rmse, report.events[i].rmse);
    ASSERT_TRUE(back.events[i].position_error.has_value());
    EXPECT_EQ(*back.events[i].position_error, *report.events[i].position_error);
  }

  // summary statistics recomputable from the per-event records
  ASSERT_TRUE(back.mean_position_error.has_value());
  double sum = 0.0, mx = 0.0;
  std::vector<double> errs;
  for (const auto& ev : back.events) {
    sum += *ev.position_error;
    mx = std::max(mx, *ev.position_error);
    errs.push_back(*ev.position_error);
  }
  EXPECT_EQ(*back.mean_position_error, sum / static_cast<double>(back.events.size()));
  EXPECT_EQ(*back.max_position_error, mx);
  std::sort(errs.begin(), errs.end());
  const double med = errs.size() % 2 ? errs[errs.size() / 2]
                                     : 0.5 * (errs[errs.size() / 2 - 1] + errs[errs.size() / 2]);
  EXPECT_EQ(*back.median_position_error, med);
  EXPECT_EQ(back.event_count, back.events.size());
}

TEST_F(IoTest, ReportWithoutMetricsOmitsErrorFields) {
  PipelineResult res;
  res.localizer.event_log.push_back({1.0, RigidTransform::identity(), 12, 2.0,
                                     Mode::GlobalSearch});
  const RunReport report = make_report(PipelineConfig{}, res, nullptr);
  io::write_report(path("report.txt"), report);
  const RunReport back = io::read_report(path("report.txt"));
  EXPECT_TRUE(back.localized);
  EXPECT_FALSE(back.mean_position_error.has_value());
  ASSERT_EQ(back.events.size(), 1u);
  EXPECT_FALSE(back.events[0].position_error.has_value());
}

TEST_F(IoTest, WritesAreByteDeterministic) {
  const ScenarioRun run = generate(demo_spec(17));
  const io::ClassRegistry classes{{"rock_small", "rock_medium", "rock_large"}};
  io::write_map_file(path("a.txt"), run.reference_map, classes);
  io::write_map_file(path("b.txt"), run.reference_map, classes);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
}
