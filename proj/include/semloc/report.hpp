#pragma once

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "semloc/io.hpp"
#include "semloc/localizer.hpp"
#include "semloc/pipeline.hpp"
#include "semloc/simulator.hpp"

namespace semloc {

/// Self-contained run summary: the configuration actually used, one record
/// per accepted registration, and summary statistics recomputable from the
/// per-event records. Error fields are present only when ground truth was
/// available.
struct RunReport {
  PipelineConfig config;

  struct EventRecord {
    double timestamp = 0.0;
    Mode mode = Mode::GlobalSearch;
    std::size_t inlier_count = 0;
    double rmse = 0.0;
    std::optional<double> position_error;
    std::optional<double> orientation_error;
  };
  std::vector<EventRecord> events;

  bool localized = false;
  std::size_t event_count = 0;
  std::optional<double> distance_to_localize;
  std::optional<std::size_t> objects_to_localize;
  std::optional<double> mean_position_error;
  std::optional<double> median_position_error;
  std::optional<double> max_position_error;
  std::optional<double> mean_orientation_error;
  std::optional<double> mean_post_localization_error;
  std::optional<double> mean_post_localization_error_global_only;
};

inline RunReport make_report(const PipelineConfig& cfg, const PipelineResult& result,
                             const RunMetrics* metrics = nullptr) {
  RunReport rep;
  rep.config = cfg;
  rep.localized = !result.localizer.event_log.empty();
  rep.event_count = result.localizer.event_log.size();
  for (std::size_t i = 0; i < result.localizer.event_log.size(); ++i) {
    const auto& ev = result.localizer.event_log[i];
    RunReport::EventRecord rec;
    rec.timestamp = ev.timestamp;
    rec.mode = ev.mode;
    rec.inlier_count = ev.inlier_count;
    rec.rmse = ev.rmse;
    if (metrics && i < metrics->event_position_errors.size()) {
      rec.position_error = metrics->event_position_errors[i];
      rec.orientation_error = metrics->event_orientation_errors[i];
    }
    rep.events.push_back(rec);
  }
  if (metrics && metrics->localized) {
    rep.distance_to_localize = metrics->distance_to_localize;
    rep.objects_to_localize = metrics->objects_to_localize;
    rep.mean_position_error = metrics->mean_event_position_error;
    rep.median_position_error = metrics->median_event_position_error;
    rep.max_position_error = metrics->max_event_position_error;
    rep.mean_orientation_error = metrics->mean_event_orientation_error;
    rep.mean_post_localization_error = metrics->mean_post_localization_error;
    rep.mean_post_localization_error_global_only =
        metrics->mean_post_localization_error_global_only;
  }
  return rep;
}

namespace io {

inline std::string report_to_string(const RunReport& rep) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("-"); };
  out << "semloc_report v1\n[config]\n";
  write_config(out, rep.config);
  out << "[events]\n";
  out << "count " << rep.events.size() << "\n";
  for (const auto& ev : rep.events)
    out << fmt(ev.timestamp) << " " << mode_name(ev.mode) << " " << ev.inlier_count << " "
        << fmt(ev.rmse) << " " << opt(ev.position_error) << " " << opt(ev.orientation_error)
        << "\n";
  out << "[summary]\n";
  out << "localized " << (rep.localized ? "true" : "false") << "\n";
  out << "event_count " << rep.event_count << "\n";
  out << "distance_to_localize " << opt(rep.distance_to_localize) << "\n";
  out << "objects_to_localize "
      << (rep.objects_to_localize ? std::to_string(*rep.objects_to_localize) : std::string("-"))
      << "\n";
  out << "mean_position_error " << opt(rep.mean_position_error) << "\n";
  out << "median_position_error " << opt(rep.median_position_error) << "\n";
  out << "max_position_error " << opt(rep.max_position_error) << "\n";
  out << "mean_orientation_error " << opt(rep.mean_orientation_error) << "\n";
  out << "mean_post_localization_error " << opt(rep.mean_post_localization_error) << "\n";
  out << "mean_post_localization_error_global_only "
      << opt(rep.mean_post_localization_error_global_only) << "\n";
  return out.str();
}

inline void write_report(const std::filesystem::path& path, const RunReport& rep) {
  auto out = detail::open_out(path);
  out << report_to_string(rep);
}

inline RunReport read_report(const std::filesystem::path& path) {
  detail::LineReader r(path);
  detail::expect_header(r, "semloc_report");
  auto section = r.require("[config]");
  if (section.size() != 1 || section[0] != "[config]") r.fail("expected [config] section");
  auto header = r.require("config header");
  if (header.size() != 2 || header[0] != "semloc_config") r.fail("expected config header");

  RunReport rep;
  rep.config = parse_config_body(r, PipelineConfig{});  // consumes the [events] marker

  auto parse_opt = [&r](const std::string& s) -> std::optional<double> {
    if (s == "-") return std::nullopt;
    return r.to_double(s);
  };

  auto cnt = r.require("event count");
  if (cnt.size() != 2 || cnt[0] != "count") r.fail("expected 'count <n>'");
  const std::size_t n = r.to_count(cnt[1]);
  for (std::size_t i = 0; i < n; ++i) {
    auto rec = r.require("event record");
    if (rec.size() != 6) r.fail("event record needs: t mode inliers rmse pos_err ori_err");
    RunReport::EventRecord ev;
    ev.timestamp = r.to_double(rec[0]);
    if (rec[1] == "global") ev.mode = Mode::GlobalSearch;
    else if (rec[1] == "guided") ev.mode = Mode::Guided;
    else r.fail("unknown mode '" + rec[1] + "'");
    ev.inlier_count = r.to_count(rec[2]);
    ev.rmse = r.to_double(rec[3]);
    ev.position_error = parse_opt(rec[4]);
    ev.orientation_error = parse_opt(rec[5]);
    rep.events.push_back(ev);
  }

  auto summary = r.require("[summary]");
  if (summary.size() != 1 || summary[0] != "[summary]") r.fail("expected [summary] section");
  while (auto tokens = r.next()) {
    const auto& t = *tokens;
    if (t.size() != 2) r.fail("summary lines are 'key value'");
    const std::string& key = t[0];
    const std::string& val = t[1];
    if (key == "localized") rep.localized = (val == "true");
    else if (key == "event_count") rep.event_count = r.to_count(val);
    else if (key == "distance_to_localize") rep.distance_to_localize = parse_opt(val);
    else if (key == "objects_to_localize") {
      if (val != "-") rep.objects_to_localize = r.to_count(val);
    } else if (key == "mean_position_error") rep.mean_position_error = parse_opt(val);
    else if (key == "median_position_error") rep.median_position_error = parse_opt(val);
    else if (key == "max_position_error") rep.max_position_error = parse_opt(val);
    else if (key == "mean_orientation_error") rep.mean_orientation_error = parse_opt(val);
    else if (key == "mean_post_localization_error") rep.mean_post_localization_error = parse_opt(val);
    else if (key == "mean_post_localization_error_global_only")
      rep.mean_post_localization_error_global_only = parse_opt(val);
    else r.fail("unknown summary key '" + key + "'");
  }
  return rep;
}

}  // namespace io
}  // namespace semloc
