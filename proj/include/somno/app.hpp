#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "somno/runner.hpp"

namespace somno {

namespace fs = std::filesystem;

// One mode's artifact set, written under out_dir. Re-running with the same
// config and seed produces byte-identical files: generation is seeded, every
// pipeline stage is deterministic, and the manifest records content hashes
// rather than timestamps.
struct RunResult {
  std::vector<std::string> outputs;  // file names relative to out_dir
  json report;                       // metrics report when the mode has one
};

namespace detail {

class ArtifactWriter {
 public:
  ArtifactWriter(const fs::path& dir, RunResult& result)
      : dir_(dir), result_(result) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw err::io("cannot create output directory " + dir_.string());
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void note(const std::string& name) { result_.outputs.push_back(name); }

  void write_json(const std::string& name, const json& j) {
    io::write_file(path(name), j.dump(2) + "\n");
    note(name);
  }

 private:
  fs::path dir_;
  RunResult& result_;
};

inline void write_run_manifest(ArtifactWriter& w, RunMode mode,
                               const RunConfig& cfg, std::uint64_t seed,
                               const std::map<std::string, std::string>& inputs,
                               const RunResult& result) {
  json input_hashes = json::object();
  for (const auto& [role, p] : inputs)
    input_hashes[role] =
        json{{"path", p}, {"fnv1a64", io::hash_hex(io::read_file(p))}};
  json outputs = json::array();
  for (const auto& name : result.outputs) outputs.push_back(name);
  w.write_json("run_manifest.json",
               json{{"tool", "somno"},
                    {"version", kVersion},
                    {"mode", to_string(mode)},
                    {"seed", seed},
                    {"config_fnv1a64", io::hash_hex(cfg.raw.dump())},
                    {"inputs", input_hashes},
                    {"outputs", outputs}});
}

inline std::string require_input(const RunConfig& cfg, const std::string& role) {
  auto it = cfg.inputs.find(role);
  if (it == cfg.inputs.end())
    throw err::usage("config is missing required input '" + role + "'");
  return it->second;
}

inline SimScenario require_scenario(const RunConfig& cfg) {
  if (!cfg.scenario)
    throw err::usage("config is missing required field 'scenario'");
  return *cfg.scenario;
}

// ---- simulate -------------------------------------------------------------

inline RunResult run_simulate(const RunConfig& cfg, const fs::path& out_dir,
                              std::uint64_t seed) {
  RunResult result;
  ArtifactWriter w(out_dir, result);

  SimScenario scn = require_scenario(cfg);
  scn.seed = seed;

  GroundTruth truth = gen_truth(scn);
  FrameSequence frames = render_thermal(scn, truth.airflow);
  bool aliasing = false;
  AdcCube cube = render_radar(scn, truth.effort, &aliasing);

  w.write_json("scenario_resolved.json", io::scenario_to_json(scn));
  io::write_series_csv(w.path("truth_airflow.csv"), w.path("truth_airflow.json"),
                       truth.airflow, "airflow");
  w.note("truth_airflow.csv");
  w.note("truth_airflow.json");
  io::write_series_csv(w.path("truth_effort.csv"), w.path("truth_effort.json"),
                       truth.effort, "effort");
  w.note("truth_effort.csv");
  w.note("truth_effort.json");
  io::write_events(w.path("truth_events.json"), truth.events);
  w.note("truth_events.json");
  io::write_frames(w.path("thermal.frames"), frames);
  w.note("thermal.frames");
  io::write_adc(w.path("radar.adc"), cube);
  w.note("radar.adc");
  w.write_json("thermal_roi.json", io::roi_to_json(scn.thermal.roi));

  w.write_json("sim_manifest.json",
               json{{"scenario", "scenario_resolved.json"},
                    {"truth_events", "truth_events.json"},
                    {"truth_airflow", "truth_airflow.csv"},
                    {"truth_effort", "truth_effort.csv"},
                    {"thermal_frames", "thermal.frames"},
                    {"radar_adc", "radar.adc"},
                    {"roi", "thermal_roi.json"},
                    {"aliasing_warning", aliasing}});
  return result;
}

// ---- analyze --------------------------------------------------------------

inline RunResult run_analyze_thermal(const RunConfig& cfg,
                                     const fs::path& out_dir,
                                     std::map<std::string, std::string>& inputs) {
  RunResult result;
  ArtifactWriter w(out_dir, result);
  const std::string frames_path = require_input(cfg, "thermal_frames");
  inputs["thermal_frames"] = frames_path;
  if (!cfg.roi)
    throw err::usage("config is missing required input 'roi' "
                     "(nose region for thermal analysis)");

  FrameSequence frames = io::read_frames(frames_path);
  ModalityAnalysis analysis = analyze_thermal_frames(frames, *cfg.roi, cfg.params);

  io::write_series_csv(w.path("waveform_thermal.csv"),
                       w.path("waveform_thermal.json"), analysis.waveform,
                       "thermal-airflow");
  w.note("waveform_thermal.csv");
  w.note("waveform_thermal.json");
  io::write_score_csv(w.path("score_thermal.csv"), analysis.detection.score);
  w.note("score_thermal.csv");
  io::write_events(w.path("events_thermal.json"), analysis.detection.events);
  w.note("events_thermal.json");
  return result;
}

inline RunResult run_analyze_radar(const RunConfig& cfg, const fs::path& out_dir,
                                   std::map<std::string, std::string>& inputs) {
  RunResult result;
  ArtifactWriter w(out_dir, result);
  const std::string adc_path = require_input(cfg, "radar_adc");
  inputs["radar_adc"] = adc_path;

  AdcCube cube = io::read_adc(adc_path);
  ModalityAnalysis analysis = analyze_radar_cube(cube, cfg.params);

  io::write_series_csv(w.path("waveform_radar.csv"), w.path("waveform_radar.json"),
                       analysis.waveform, "radar-effort");
  w.note("waveform_radar.csv");
  w.note("waveform_radar.json");
  io::write_score_csv(w.path("score_radar.csv"), analysis.detection.score);
  w.note("score_radar.csv");
  io::write_events(w.path("events_radar.json"), analysis.detection.events);
  w.note("events_radar.json");
  if (analysis.bin) {
    const double snr = analysis.bin->snr;
    w.write_json("bin_selection.json",
                 json{{"index", analysis.bin->index},
                      {"snr", std::isfinite(snr) ? json(snr) : json("inf")},
                      {"window", analysis.bin->window}});
  }
  return result;
}

// ---- classify ---------------------------------------------------------------

inline EventList classify_event_lists(const EventList& thermal_events,
                                      const EventList& radar_events,
                                      double span_s,
                                      const PipelineParams& params) {
  const double rate = params.indicator_rate_hz;
  std::size_t clipped_t = 0;
  std::size_t clipped_r = 0;
  BinaryIndicator thermal = rasterize(thermal_events, rate, span_s, 0.0, &clipped_t);
  BinaryIndicator radar = rasterize(radar_events, rate, span_s, 0.0, &clipped_r);
  if (clipped_t + clipped_r > 0)
    std::fprintf(stderr,
                 "warning: %zu event(s) extend outside the %.1f s span and "
                 "were clipped\n",
                 clipped_t + clipped_r, span_s);
  return classify(thermal, radar, params.classify_min_dur_s);
}

inline double events_span(const EventList& a, const EventList& b) {
  double span = 0.0;
  for (const auto& e : a) span = std::max(span, e.end_s);
  for (const auto& e : b) span = std::max(span, e.end_s);
  return span + 1.0;
}

inline RunResult run_classify(const RunConfig& cfg, const fs::path& out_dir,
                              std::map<std::string, std::string>& inputs) {
  RunResult result;
  ArtifactWriter w(out_dir, result);
  const std::string thermal_path = require_input(cfg, "events_thermal");
  const std::string radar_path = require_input(cfg, "events_radar");
  inputs["events_thermal"] = thermal_path;
  inputs["events_radar"] = radar_path;

  EventList thermal_events = io::read_events(thermal_path);
  EventList radar_events = io::read_events(radar_path);
  double span = events_span(thermal_events, radar_events);
  if (cfg.inputs.count("span_s"))
    span = std::stod(cfg.inputs.at("span_s"));

  EventList classified =
      classify_event_lists(thermal_events, radar_events, span, cfg.params);
  io::write_events(w.path("events_classified.json"), classified);
  w.note("events_classified.json");
  return result;
}

// ---- evaluate ---------------------------------------------------------------

inline json evaluate_report(const TimeSeries& thermal_waveform,
                            const TimeSeries& radar_waveform,
                            const TimeSeries& truth_airflow,
                            const TimeSeries& truth_effort,
                            const EventList& events_thermal,
                            const EventList& events_radar,
                            const EventList& truth_events,
                            const EventList* classified,
                            const PipelineParams& params,
                            ArtifactWriter& w) {
  ModalityEvaluation thermal_ev = evaluate_modality(
      thermal_waveform, truth_airflow, events_thermal, truth_events, params);
  ModalityEvaluation radar_ev = evaluate_modality(
      radar_waveform, truth_effort, events_radar, truth_events, params);

  io::write_bland_altman_csv(w.path("bland_altman_thermal.csv"),
                             thermal_ev.bland.points);
  w.note("bland_altman_thermal.csv");
  io::write_bland_altman_csv(w.path("bland_altman_radar.csv"),
                             radar_ev.bland.points);
  w.note("bland_altman_radar.csv");

  json report{
      {"breathing_rate",
       {{"thermal", rr_to_json(thermal_ev.rr, thermal_ev.rr_windows)},
        {"radar", rr_to_json(radar_ev.rr, radar_ev.rr_windows)}}},
      {"bland_altman",
       {{"thermal", bland_altman_to_json(thermal_ev.bland)},
        {"radar", bland_altman_to_json(radar_ev.bland)}}},
      {"apnea_detection",
       {{"thermal", metrics_to_json(thermal_ev.detection)},
        {"radar", metrics_to_json(radar_ev.detection)}}},
      {"event_matching",
       {{"thermal",
         {{"TP", thermal_ev.matching.tp},
          {"FP", thermal_ev.matching.fp},
          {"FN", thermal_ev.matching.fn}}},
        {"radar",
         {{"TP", radar_ev.matching.tp},
          {"FP", radar_ev.matching.fp},
          {"FN", radar_ev.matching.fn}}}}}};

  if (classified) {
    EventMatching match = event_matching(*classified, truth_events, params.event_iou);
    std::size_t kind_correct = 0;
    for (const auto& [p, g] : match.pairs)
      if ((*classified)[p].kind == truth_events[g].kind) ++kind_correct;
    report["classification"] =
        json{{"events", classified->size()},
             {"matched", match.pairs.size()},
             {"kind_correct", kind_correct},
             {"kind_accuracy", match.pairs.empty()
                                   ? json(nullptr)
                                   : json(static_cast<double>(kind_correct) /
                                          static_cast<double>(match.pairs.size()))}};
  }
  return report;
}

inline RunResult run_evaluate(const RunConfig& cfg, const fs::path& out_dir,
                              std::map<std::string, std::string>& inputs) {
  RunResult result;
  ArtifactWriter w(out_dir, result);
  const auto series_input = [&](const std::string& role) {
    const std::string csv = require_input(cfg, role);
    inputs[role] = csv;
    const std::string sidecar = require_input(cfg, role + "_meta");
    inputs[role + "_meta"] = sidecar;
    return io::read_series_csv(csv, sidecar);
  };
  TimeSeries thermal_waveform = series_input("waveform_thermal");
  TimeSeries radar_waveform = series_input("waveform_radar");
  TimeSeries truth_airflow = series_input("truth_airflow");
  TimeSeries truth_effort = series_input("truth_effort");

  const std::string et = require_input(cfg, "events_thermal");
  const std::string er = require_input(cfg, "events_radar");
  const std::string eg = require_input(cfg, "truth_events");
  inputs["events_thermal"] = et;
  inputs["events_radar"] = er;
  inputs["truth_events"] = eg;
  EventList events_thermal = io::read_events(et);
  EventList events_radar = io::read_events(er);
  EventList truth_events = io::read_events(eg);

  EventList classified;
  const EventList* classified_ptr = nullptr;
  if (cfg.inputs.count("events_classified")) {
    inputs["events_classified"] = cfg.inputs.at("events_classified");
    classified = io::read_events(cfg.inputs.at("events_classified"));
    classified_ptr = &classified;
  }

  result.report = evaluate_report(thermal_waveform, radar_waveform,
                                  truth_airflow, truth_effort, events_thermal,
                                  events_radar, truth_events, classified_ptr,
                                  cfg.params, w);
  w.write_json("metrics_report.json", result.report);
  return result;
}

// ---- end-to-end -------------------------------------------------------------

inline RunResult run_end_to_end(const RunConfig& cfg, const fs::path& out_dir,
                                std::uint64_t seed) {
  RunResult result;
  ArtifactWriter w(out_dir, result);

  SimScenario scn = require_scenario(cfg);
  scn.seed = seed;

  GroundTruth truth = gen_truth(scn);
  FrameSequence frames = render_thermal(scn, truth.airflow);
  AdcCube cube = render_radar(scn, truth.effort);

  w.write_json("scenario_resolved.json", io::scenario_to_json(scn));
  io::write_series_csv(w.path("truth_airflow.csv"), w.path("truth_airflow.json"),
                       truth.airflow, "airflow");
  w.note("truth_airflow.csv");
  w.note("truth_airflow.json");
  io::write_series_csv(w.path("truth_effort.csv"), w.path("truth_effort.json"),
                       truth.effort, "effort");
  w.note("truth_effort.csv");
  w.note("truth_effort.json");
  io::write_events(w.path("truth_events.json"), truth.events);
  w.note("truth_events.json");
  io::write_frames(w.path("thermal.frames"), frames);
  w.note("thermal.frames");
  io::write_adc(w.path("radar.adc"), cube);
  w.note("radar.adc");

  ModalityAnalysis thermal_an =
      analyze_thermal_frames(frames, scn.thermal.roi, cfg.params);
  ModalityAnalysis radar_an = analyze_radar_cube(cube, cfg.params);

  io::write_series_csv(w.path("waveform_thermal.csv"),
                       w.path("waveform_thermal.json"), thermal_an.waveform,
                       "thermal-airflow");
  w.note("waveform_thermal.csv");
  w.note("waveform_thermal.json");
  io::write_series_csv(w.path("waveform_radar.csv"), w.path("waveform_radar.json"),
                       radar_an.waveform, "radar-effort");
  w.note("waveform_radar.csv");
  w.note("waveform_radar.json");
  io::write_score_csv(w.path("score_thermal.csv"), thermal_an.detection.score);
  w.note("score_thermal.csv");
  io::write_score_csv(w.path("score_radar.csv"), radar_an.detection.score);
  w.note("score_radar.csv");
  io::write_events(w.path("events_thermal.json"), thermal_an.detection.events);
  w.note("events_thermal.json");
  io::write_events(w.path("events_radar.json"), radar_an.detection.events);
  w.note("events_radar.json");

  EventList classified =
      classify_event_lists(thermal_an.detection.events,
                           radar_an.detection.events, scn.duration_s, cfg.params);
  io::write_events(w.path("events_classified.json"), classified);
  w.note("events_classified.json");

  result.report = evaluate_report(
      thermal_an.waveform, radar_an.waveform, truth.airflow, truth.effort,
      thermal_an.detection.events, radar_an.detection.events, truth.events,
      &classified, cfg.params, w);
  w.write_json("metrics_report.json", result.report);
  return result;
}

}  // namespace detail

// Entry point shared by the CLI and the acceptance suite. Artifacts land in
// out_dir; a run manifest with config and input hashes is always written.
inline RunResult run(RunMode mode, const RunConfig& cfg,
                     const std::string& out_dir,
                     std::optional<std::uint64_t> seed_override = {}) {
  const std::uint64_t seed = seed_override.value_or(
      cfg.seed.value_or(cfg.scenario ? cfg.scenario->seed : 1));

  RunResult result;
  std::map<std::string, std::string> inputs;
  switch (mode) {
    case RunMode::simulate:
      result = detail::run_simulate(cfg, out_dir, seed);
      break;
    case RunMode::analyze_thermal:
      result = detail::run_analyze_thermal(cfg, out_dir, inputs);
      break;
    case RunMode::analyze_radar:
      result = detail::run_analyze_radar(cfg, out_dir, inputs);
      break;
    case RunMode::classify_events:
      result = detail::run_classify(cfg, out_dir, inputs);
      break;
    case RunMode::evaluate:
      result = detail::run_evaluate(cfg, out_dir, inputs);
      break;
    case RunMode::end_to_end:
      result = detail::run_end_to_end(cfg, out_dir, seed);
      break;
  }

  detail::ArtifactWriter w(out_dir, result);
  detail::write_run_manifest(w, mode, cfg, seed, inputs, result);
  return result;
}

}  // namespace somno
