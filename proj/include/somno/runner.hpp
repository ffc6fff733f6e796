#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "somno/apnea.hpp"
#include "somno/classify.hpp"
#include "somno/errors.hpp"
#include "somno/filter.hpp"
#include "somno/io.hpp"
#include "somno/metrics.hpp"
#include "somno/radar.hpp"
#include "somno/sim.hpp"
#include "somno/spectral.hpp"
#include "somno/thermal.hpp"
#include "somno/version.hpp"

namespace somno {

using nlohmann::json;

enum class RunMode {
  simulate,
  analyze_thermal,
  analyze_radar,
  classify_events,
  evaluate,
  end_to_end,
};

inline const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::simulate: return "simulate";
    case RunMode::analyze_thermal: return "analyze-thermal";
    case RunMode::analyze_radar: return "analyze-radar";
    case RunMode::classify_events: return "classify";
    case RunMode::evaluate: return "evaluate";
    case RunMode::end_to_end: return "end-to-end";
  }
  return "?";
}

inline RunMode run_mode_from_string(const std::string& s) {
  if (s == "simulate") return RunMode::simulate;
  if (s == "analyze-thermal") return RunMode::analyze_thermal;
  if (s == "analyze-radar") return RunMode::analyze_radar;
  if (s == "classify") return RunMode::classify_events;
  if (s == "evaluate") return RunMode::evaluate;
  if (s == "end-to-end") return RunMode::end_to_end;
  throw err::usage("unknown mode '" + s + "'");
}

// All pipeline tunables with their defaults. Every field can be overridden
// from the config file's "params" object.
struct PipelineParams {
  FrequencyBand band{0.1, 0.5};
  std::size_t derivative_window = 0;  // 0 = auto from sample rate (25 @ 30 Hz)
  std::size_t envelope_window = 23;
  bool motion_detection = true;
  std::size_t knn_k = 10;
  double knn_beta = 2.5;
  double motion_guard_s = 2.0;
  double theta_thermal = 0.3;
  double theta_radar = 0.3;
  double min_event_s = 10.0;
  double merge_gap_s = 1.0;
  std::size_t pre_smooth_window = 0;
  std::size_t bin_window = 11;       // M
  std::size_t snr_halfwidth = 1;
  std::size_t fft_length = 0;        // 0 = samples_per_chirp
  double chunk_s = 60.0;
  std::size_t chunks_per_block = 20;
  double block_s = 300.0;
  double chunk_overlap_s = 5.0;
  double event_iou = 0.3;
  double indicator_rate_hz = 10.0;
  double classify_min_dur_s = 10.0;
};

struct RunConfig {
  std::optional<SimScenario> scenario;
  std::map<std::string, std::string> inputs;  // role -> path
  std::optional<RoiRect> roi;
  PipelineParams params;
  std::optional<std::uint64_t> seed;
  json raw;  // config document as loaded (for the manifest hash)
};

namespace detail {

inline void read_params(const json& p, PipelineParams& out) {
  if (p.contains("band_low_hz") || p.contains("band_high_hz"))
    out.band = FrequencyBand(p.value("band_low_hz", out.band.low),
                             p.value("band_high_hz", out.band.high));
  out.derivative_window = p.value("derivative_window", out.derivative_window);
  out.envelope_window = p.value("envelope_window", out.envelope_window);
  out.motion_detection = p.value("motion_detection", out.motion_detection);
  out.knn_k = p.value("knn_k", out.knn_k);
  out.knn_beta = p.value("knn_beta", out.knn_beta);
  out.motion_guard_s = p.value("motion_guard_s", out.motion_guard_s);
  out.theta_thermal = p.value("theta_thermal", out.theta_thermal);
  out.theta_radar = p.value("theta_radar", out.theta_radar);
  out.min_event_s = p.value("min_event_s", out.min_event_s);
  out.merge_gap_s = p.value("merge_gap_s", out.merge_gap_s);
  out.pre_smooth_window = p.value("pre_smooth_window", out.pre_smooth_window);
  out.bin_window = p.value("bin_window", out.bin_window);
  out.snr_halfwidth = p.value("snr_halfwidth", out.snr_halfwidth);
  out.fft_length = p.value("fft_length", out.fft_length);
  out.chunk_s = p.value("chunk_s", out.chunk_s);
  out.chunks_per_block = p.value("chunks_per_block", out.chunks_per_block);
  out.block_s = p.value("block_s", out.block_s);
  out.chunk_overlap_s = p.value("chunk_overlap_s", out.chunk_overlap_s);
  out.event_iou = p.value("event_iou", out.event_iou);
  out.indicator_rate_hz = p.value("indicator_rate_hz", out.indicator_rate_hz);
  out.classify_min_dur_s = p.value("classify_min_dur_s", out.classify_min_dur_s);
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  cfg.raw = j;
  if (j.contains("scenario")) cfg.scenario = io::scenario_from_json(j.at("scenario"));
  if (j.contains("scenario_path"))
    cfg.scenario = io::scenario_from_json(io::load_json(j.at("scenario_path").get<std::string>()));
  if (j.contains("inputs")) {
    for (const auto& [key, value] : j.at("inputs").items()) {
      if (key == "roi")
        cfg.roi = io::roi_from_json(value);
      else
        cfg.inputs[key] = value.get<std::string>();
    }
  }
  if (j.contains("params")) detail::read_params(j.at("params"), cfg.params);
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(io::load_json(path));
}

// A built-in short scenario with one apnea of each kind and a motion burst,
// so `somno simulate --demo` works out of the box.
inline SimScenario demo_scenario() {
  SimScenario scn;
  scn.duration_s = 240.0;
  scn.seed = 42;
  scn.profile = BreathingProfile{15.0, 0.3, 1.0, 0.2, 0.3};
  scn.thermal.height = 32;
  scn.thermal.width = 40;
  scn.thermal.roi = RoiRect{12, 15, 8, 10};
  scn.thermal.noise_std = 0.1;
  scn.radar.noise_std = 0.2;
  ApneaSpec csa;
  csa.start_s = 60.0;
  csa.duration_s = 18.0;
  csa.kind = EventKind::csa;
  csa.airflow_attenuation = 0.95;
  csa.effort_attenuation = 0.95;
  ApneaSpec osa;
  osa.start_s = 150.0;
  osa.duration_s = 16.0;
  osa.kind = EventKind::osa;
  osa.airflow_attenuation = 0.95;
  osa.effort_attenuation = 0.15;
  scn.apneas = {csa, osa};
  MotionArtifactSpec burst;
  burst.time_s = 110.0;
  burst.duration_s = 2.0;
  burst.magnitude = 10.0;
  burst.dropout_s = 0.0;
  scn.motions = {burst};
  return scn;
}

// ---------------------------------------------------------------------------
// Pipeline stages shared by the CLI modes
// ---------------------------------------------------------------------------

struct ModalityAnalysis {
  TimeSeries waveform;  // breathing waveform after derivative + band-pass
  ApneaDetectionResult detection;
  std::optional<BinSelection> bin;  // radar only
};

inline ApneaDetectionParams detection_params(const PipelineParams& p,
                                             double theta) {
  ApneaDetectionParams d;
  d.theta = theta;
  d.min_event_s = p.min_event_s;
  d.merge_gap_s = p.merge_gap_s;
  d.envelope_window = p.envelope_window;
  d.motion_detection = p.motion_detection;
  d.knn_k = p.knn_k;
  d.knn_beta = p.knn_beta;
  d.guard_s = p.motion_guard_s;
  d.pre_smooth_window = p.pre_smooth_window;
  return d;
}

// Thermal pipeline: ROI mean -> window-averaged derivative -> band-pass ->
// envelope apnea detector.
inline ModalityAnalysis analyze_thermal_frames(const FrameSequence& frames,
                                               const RoiRect& roi,
                                               const PipelineParams& params) {
  ModalityAnalysis out;
  TimeSeries raw = roi_mean_series(frames, roi);
  const std::size_t n = params.derivative_window > 0
                            ? params.derivative_window
                            : derivative_window_for_rate(raw.rate);
  TimeSeries deriv = motion_compensated_derivative(raw, n);
  out.waveform = bandpass(deriv, params.band);
  out.detection =
      detect_apnea(out.waveform, detection_params(params, params.theta_thermal));
  return out;
}

// Radar pipeline: range matrix -> SNR-weighted bin selection (includes the
// derivative step) -> band-pass -> envelope apnea detector.
inline ModalityAnalysis analyze_radar_cube(const AdcCube& cube,
                                           const PipelineParams& params) {
  ModalityAnalysis out;
  RangeMatrix rm = range_matrix(cube, params.fft_length);
  const std::size_t n = params.derivative_window > 0
                            ? params.derivative_window
                            : derivative_window_for_rate(rm.config.chirp_rate_hz);
  auto [sel, series] = select_breathing_bin(rm, params.bin_window, params.band,
                                            params.snr_halfwidth, n);
  out.bin = sel;
  out.waveform = bandpass(series, params.band);
  out.detection =
      detect_apnea(out.waveform, detection_params(params, params.theta_radar));
  return out;
}

// Per-window rate pairs against a ground-truth series. Windows where either
// side cannot produce a rate (no in-band signal) are skipped in pairs.
inline RrComparison rr_comparison(const TimeSeries& estimated,
                                  const TimeSeries& truth,
                                  const PipelineParams& params) {
  RrComparison cmp;
  cmp.window_s = params.chunk_s;
  cmp.stride_s = params.block_s / static_cast<double>(params.chunks_per_block);
  const double total = truth.duration();
  for (const auto& [w0, w1] :
       chunk_windows(total, params.chunk_s, params.chunks_per_block, params.block_s)) {
    TimeSeries est_win = slice(estimated, w0, w1);
    TimeSeries gt_win = slice(truth, w0, w1);
    if (est_win.duration() < 0.9 * params.chunk_s ||
        gt_win.duration() < 0.9 * params.chunk_s)
      continue;
    try {
      const double est = spectral_rate(est_win, params.band);
      const double gt = spectral_rate(gt_win, params.band);
      cmp.estimated.push_back(est);
      cmp.ground_truth.push_back(gt);
    } catch (const Error&) {
      continue;  // window without usable in-band signal on one side
    }
  }
  return cmp;
}

// ---------------------------------------------------------------------------
// Evaluation report
// ---------------------------------------------------------------------------

inline json metrics_to_json(const DetectionMetrics& m) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  };
  return json{{"Accuracy", opt(m.accuracy)},
              {"Precision", opt(m.precision)},
              {"Recall", opt(m.recall)},
              {"F1 Score", opt(m.f1)},
              {"Intra-Class Correlation", opt(m.icc)},
              {"TP", m.tp},
              {"TN", m.tn},
              {"FP", m.fp},
              {"FN", m.fn}};
}

inline json rr_to_json(const RrMetrics& m, std::size_t windows) {
  return json{{"MAE", m.mae},
              {"RMSE", m.rmse},
              {"MAPE", m.mape_pct},
              {"windows", windows}};
}

inline json bland_altman_to_json(const BlandAltmanStats& s) {
  return json{{"mean_diff", s.mean_diff},
              {"sd_diff", s.sd_diff},
              {"loa_low", s.loa_low},
              {"loa_high", s.loa_high}};
}

struct ModalityEvaluation {
  RrMetrics rr;
  std::size_t rr_windows = 0;
  BlandAltmanStats bland;
  DetectionMetrics detection;
  EventMatching matching;
};

inline ModalityEvaluation evaluate_modality(const TimeSeries& est_waveform,
                                            const TimeSeries& truth_waveform,
                                            const EventList& pred_events,
                                            const EventList& truth_events,
                                            const PipelineParams& params) {
  ModalityEvaluation ev;
  RrComparison cmp = rr_comparison(est_waveform, truth_waveform, params);
  if (cmp.estimated.empty())
    throw err::no_data("evaluation produced no usable rate windows");
  ev.rr = rr_metrics(cmp);
  ev.rr_windows = cmp.estimated.size();
  ev.bland = bland_altman(cmp.estimated, cmp.ground_truth);

  const auto windows = chunk_windows(truth_waveform.duration(), params.chunk_s,
                                     params.chunks_per_block, params.block_s);
  DetectionOutcome outcome;
  outcome.predicted = chunk_labels(pred_events, windows, params.chunk_overlap_s);
  outcome.ground_truth = chunk_labels(truth_events, windows, params.chunk_overlap_s);
  ev.detection = detection_metrics(outcome);
  ev.matching = event_matching(pred_events, truth_events, params.event_iou);
  return ev;
}

}  // namespace somno
