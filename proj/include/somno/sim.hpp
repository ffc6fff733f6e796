#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "somno/errors.hpp"
#include "somno/radar.hpp"
#include "somno/radiometry.hpp"
#include "somno/rng.hpp"
#include "somno/thermal.hpp"
#include "somno/time_series.hpp"

namespace somno {

// ---------------------------------------------------------------------------
// Scenario description
// ---------------------------------------------------------------------------

struct BreathingProfile {
  double rate_bpm = 15.0;
  double rate_jitter_bpm = 0.3;    // per-breath std
  double amplitude = 1.0;          // airflow units / chest displacement scale
  double amplitude_jitter = 0.05;  // fractional per-breath std
  double shape = 0.3;              // 0 = sinusoid, 1 = strongly skewed exhale

  void validate() const {
    if (!(rate_bpm > 4.0) || !(rate_bpm < 60.0))
      throw err::spec("breathing rate must be in (4, 60) BPM");
    if (!(amplitude > 0.0)) throw err::spec("breathing amplitude must be > 0");
    if (shape < 0.0 || shape > 1.0)
      throw err::spec("breathing shape must be in [0, 1]");
  }
};

struct ApneaSpec {
  double start_s = 0.0;
  double duration_s = 15.0;
  EventKind kind = EventKind::csa;
  double airflow_attenuation = 0.95;  // fraction removed, >= 0.9
  double effort_attenuation = 0.95;   // >= 0.9 for CSA, <= 0.3 for OSA
  // Transition time. The annotated interval [start, start+duration] brackets
  // the span at full attenuation, the way a scored event marks where airflow
  // is already reduced; the ramps run just outside it.
  double ramp_s = 0.2;

  void validate() const {
    if (duration_s < 10.0)
      throw err::spec("apnea duration must be >= 10 s");
    if (airflow_attenuation < 0.9 || airflow_attenuation > 1.0)
      throw err::spec("airflow attenuation must be in [0.9, 1.0]");
    if (kind == EventKind::csa &&
        (effort_attenuation < 0.9 || effort_attenuation > 1.0))
      throw err::spec("CSA effort attenuation must be in [0.9, 1.0]");
    if (kind == EventKind::osa &&
        (effort_attenuation < 0.0 || effort_attenuation > 0.3))
      throw err::spec("OSA effort attenuation must be in [0, 0.3]");
    if (kind == EventKind::unknown)
      throw err::spec("apnea spec kind must be OSA or CSA");
    if (ramp_s < 0.0) throw err::spec("apnea ramp must be >= 0");
  }
};

enum class Modality { thermal, radar, both };

// Patient-motion disturbance. The visible signature is a high-magnitude
// excursion lasting duration_s; when dropout_s > 0 the breathing modulation is
// additionally suppressed for dropout_s after the excursion begins (nose or
// chest displaced from where the sensor expects it), recovering smoothly over
// the final recovery_ramp_s.
struct MotionArtifactSpec {
  double time_s = 0.0;
  double magnitude = 10.0;  // multiple of the breathing amplitude
  double duration_s = 1.0;  // excursion width
  double dropout_s = 0.0;   // modulation suppression window (0 = none)
  double dropout_residual = 0.05;
  double recovery_ramp_s = 1.0;
  Modality affected = Modality::both;

  bool affects(Modality m) const {
    return affected == Modality::both || affected == m;
  }
};

struct ThermalRenderConfig {
  std::size_t height = 64;
  std::size_t width = 80;
  RoiRect roi{24, 30, 16, 20};
  double frame_rate_hz = 30.0;
  double base_temp_k = 307.0;        // nasal region
  double background_temp_k = 295.0;  // rest of the frame
  double swing_k = 0.5;              // breath-synchronous temperature swing
  double noise_std = 0.2;            // intensity counts, per pixel
  double emissivity = 0.98;
  // (time_s, gain) pairs: global multiplicative recalibration steps
  std::vector<std::pair<double, double>> calibration_steps;
};

struct RadarRenderConfig {
  ChirpConfig chirp;
  double target_range_m = 1.0;
  double target_amplitude = 1.0;
  double displacement_m = 0.001;  // chest displacement per unit breathing amplitude
  // (range_m, amplitude) static reflectors
  std::vector<std::pair<double, double>> clutter;
  double noise_std = 0.0;  // complex Gaussian, per I/Q component
};

struct SimScenario {
  double duration_s = 300.0;
  BreathingProfile profile;
  std::vector<ApneaSpec> apneas;
  std::vector<MotionArtifactSpec> motions;
  ThermalRenderConfig thermal;
  RadarRenderConfig radar;
  std::uint64_t seed = 1;

  void validate() const {
    profile.validate();
    if (!(duration_s > 0.0)) throw err::spec("duration must be > 0");
    double prev_end = -1e300;
    for (const auto& a : apneas) {
      a.validate();
      if (a.start_s - a.ramp_s < prev_end)
        throw err::spec("apnea intervals (including ramps) must be sorted "
                        "and non-overlapping");
      prev_end = a.start_s + a.duration_s + a.ramp_s;
    }
    thermal.roi.validate_within(thermal.height, thermal.width);
    radar.chirp.validate();
  }
};

// ---------------------------------------------------------------------------
// Ground truth generation
// ---------------------------------------------------------------------------

namespace detail {

struct Breath {
  double start_s;
  double duration_s;
  double airflow_amp;
  double effort_amp;
};

// One seeded draw of the whole night's breath schedule. Both sensors sample
// the same schedule, which is what ties airflow and effort to a common phase.
inline std::vector<Breath> breath_schedule(const SimScenario& scn) {
  Rng rng(derive_seed(scn.seed, "breath-schedule"));
  std::vector<Breath> breaths;
  double t = 0.0;
  while (t < scn.duration_s) {
    const double bpm = std::clamp(
        rng.normal(scn.profile.rate_bpm, scn.profile.rate_jitter_bpm), 4.2, 59.0);
    Breath b;
    b.start_s = t;
    b.duration_s = 60.0 / bpm;
    b.airflow_amp = scn.profile.amplitude *
                    std::max(0.05, rng.normal(1.0, scn.profile.amplitude_jitter));
    b.effort_amp = scn.profile.amplitude *
                   std::max(0.05, rng.normal(1.0, scn.profile.amplitude_jitter));
    breaths.push_back(b);
    t += b.duration_s;
  }
  return breaths;
}

// Raised-cosine breath waveform with a time warp controlled by `shape`:
// shape 0 is a pure cosine, larger values compress the inhale and stretch the
// exhale while keeping +-1 extremes and period-boundary continuity.
inline double breath_waveform(double phase, double shape) {
  const double p = 0.5 - 0.15 * shape;  // warped location of the trough
  const double g = phase < p ? 0.5 * phase / p
                             : 0.5 + 0.5 * (phase - p) / (1.0 - p);
  return std::cos(2.0 * std::numbers::pi * g);
}

// Smooth 0..1..0 attenuation profile of an apnea at time t. Full depth over
// the annotated interval itself; raised-cosine transitions immediately before
// and after it.
inline double apnea_depth(const ApneaSpec& a, double t) {
  const double end = a.start_s + a.duration_s;
  if (t >= a.start_s && t <= end) return 1.0;
  if (a.ramp_s <= 0.0) return 0.0;
  if (t > a.start_s - a.ramp_s && t < a.start_s) {
    const double u = (a.start_s - t) / a.ramp_s;  // 0 at onset
    return 0.5 + 0.5 * std::cos(std::numbers::pi * u);
  }
  if (t > end && t < end + a.ramp_s) {
    const double u = (t - end) / a.ramp_s;
    return 0.5 + 0.5 * std::cos(std::numbers::pi * u);
  }
  return 0.0;
}

class TruthSampler {
 public:
  explicit TruthSampler(const SimScenario& scn)
      : scenario_(scn), breaths_(breath_schedule(scn)) {}

  // (airflow, effort) at absolute time t, in profile amplitude units
  std::pair<double, double> sample(double t) const {
    const Breath& b = breath_at(t);
    const double phase =
        std::clamp((t - b.start_s) / b.duration_s, 0.0, 1.0 - 1e-12);
    const double w = breath_waveform(phase, scenario_.profile.shape);
    double air = b.airflow_amp * w;
    double eff = b.effort_amp * w;
    for (const ApneaSpec& a : scenario_.apneas) {
      const double depth = apnea_depth(a, t);
      if (depth > 0.0) {
        air *= 1.0 - depth * a.airflow_attenuation;
        eff *= 1.0 - depth * a.effort_attenuation;
      }
    }
    return {air, eff};
  }

 private:
  const Breath& breath_at(double t) const {
    // breaths are contiguous and sorted; binary search by start time
    std::size_t lo = 0;
    std::size_t hi = breaths_.size();
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (breaths_[mid].start_s <= t)
        lo = mid;
      else
        hi = mid;
    }
    return breaths_[lo];
  }

  const SimScenario& scenario_;
  std::vector<Breath> breaths_;
};

// Modulation suppression factor from motion dropouts at time t (1 = intact).
inline double motion_dropout_factor(const SimScenario& scn, Modality m,
                                    double t) {
  double factor = 1.0;
  for (const MotionArtifactSpec& a : scn.motions) {
    if (!a.affects(m) || a.dropout_s <= 0.0) continue;
    const double end = a.time_s + a.dropout_s;
    if (t <= a.time_s || t >= end) continue;
    double f = a.dropout_residual;
    if (a.recovery_ramp_s > 0.0 && t > end - a.recovery_ramp_s) {
      const double u = (end - t) / a.recovery_ramp_s;  // 1 -> 0
      f = 1.0 - (1.0 - a.dropout_residual) * u;
    }
    factor = std::min(factor, f);
  }
  return factor;
}

// Excursion envelope (in breathing-amplitude multiples) at time t.
inline double motion_excursion(const SimScenario& scn, Modality m, double t) {
  double e = 0.0;
  for (const MotionArtifactSpec& a : scn.motions) {
    if (!a.affects(m) || a.duration_s <= 0.0) continue;
    if (t <= a.time_s || t >= a.time_s + a.duration_s) continue;
    const double u = (t - a.time_s) / a.duration_s;
    e += a.magnitude * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u));
  }
  return e;
}

}  // namespace detail

struct GroundTruth {
  TimeSeries airflow;  // sampled at the thermal frame rate
  TimeSeries effort;   // sampled at the radar chirp rate
  EventList events;
};

// Clean physiological truth: shared-phase airflow and effort waveforms with
// the scenario's apneas applied, plus the event annotations. Motion artifacts
// are sensor-level and appear only in the rendered outputs.
inline GroundTruth gen_truth(const SimScenario& scn) {
  scn.validate();
  detail::TruthSampler sampler(scn);

  const auto sample_series = [&](double rate, bool airflow) {
    const std::size_t n =
        static_cast<std::size_t>(std::floor(scn.duration_s * rate + 1e-9));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate;
      const auto [air, eff] = sampler.sample(t);
      out[i] = airflow ? air : eff;
    }
    return TimeSeries(std::move(out), rate, 0.0);
  };

  GroundTruth truth;
  truth.airflow = sample_series(scn.thermal.frame_rate_hz, true);
  truth.effort = sample_series(scn.radar.chirp.chirp_rate_hz, false);
  for (const ApneaSpec& a : scn.apneas) {
    ApneaEvent e;
    e.start_s = a.start_s;
    e.end_s = a.start_s + a.duration_s;
    e.kind = a.kind;
    e.confidence = 1.0;
    truth.events.push_back(e);
  }
  return truth;
}

// ---------------------------------------------------------------------------
// Thermal rendering
// ---------------------------------------------------------------------------

// Renders the airflow waveform into thermal frames: the nasal ROI breathes
// (base temperature plus a breath-synchronous swing), the background is
// static, and everything carries per-pixel Gaussian noise, global calibration
// gain steps, and motion excursions.
inline FrameSequence render_thermal(const SimScenario& scn,
                                    const TimeSeries& airflow) {
  scn.validate();
  const ThermalRenderConfig& cfg = scn.thermal;
  RadiometricParams rad(cfg.emissivity);

  const double background_intensity =
      radiant_exitance(cfg.background_temp_k, rad);
  // breathing amplitude in intensity counts (for motion excursion scaling)
  const double swing_intensity =
      0.5 * (radiant_exitance(cfg.base_temp_k + cfg.swing_k, rad) -
             radiant_exitance(cfg.base_temp_k - cfg.swing_k, rad));

  FrameSequence seq;
  seq.height = cfg.height;
  seq.width = cfg.width;
  seq.count = airflow.size();
  seq.rate = cfg.frame_rate_hz;
  seq.t0 = airflow.t0;
  seq.data.assign(seq.count * seq.height * seq.width, 0.0f);

  std::vector<std::pair<double, double>> steps = cfg.calibration_steps;
  std::sort(steps.begin(), steps.end());

  Rng rng(derive_seed(scn.seed, "render-thermal"));
  for (std::size_t t = 0; t < seq.count; ++t) {
    const double now = airflow.time_at(t);
    double gain = 1.0;
    for (const auto& [when, factor] : steps)
      if (now >= when) gain *= factor;

    const double normalized =
        airflow.samples[t] / scn.profile.amplitude *
        detail::motion_dropout_factor(scn, Modality::thermal, now);
    const double roi_temp = cfg.base_temp_k + cfg.swing_k * normalized;
    const double roi_intensity = radiant_exitance(roi_temp, rad);
    const double excursion =
        detail::motion_excursion(scn, Modality::thermal, now) * swing_intensity;

    float* frame = seq.data.data() + t * seq.height * seq.width;
    for (std::size_t r = 0; r < seq.height; ++r) {
      const bool roi_row =
          r >= cfg.roi.row0 && r < cfg.roi.row0 + cfg.roi.height;
      for (std::size_t c = 0; c < seq.width; ++c) {
        const bool in_roi = roi_row && c >= cfg.roi.col0 &&
                            c < cfg.roi.col0 + cfg.roi.width;
        const double clean = in_roi ? roi_intensity : background_intensity;
        const double value =
            gain * (clean + excursion + rng.normal(0.0, cfg.noise_std));
        frame[r * seq.width + c] = static_cast<float>(value);
      }
    }
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Radar rendering
// ---------------------------------------------------------------------------

// Synthesizes the IF signal per chirp: for each reflector at round-trip delay
// t_d = 2R/c the fast-time sample n carries phase
//   2π f_c t_d + 2π (k t_d) n/f_adc + π k t_d²,
// i.e. a beat tone whose frequency encodes range and whose phase encodes
// sub-wavelength displacement. The breather sits at target_range_m and moves
// by displacement_m per unit normalized effort; clutter reflectors are
// static. Complex Gaussian noise is added per sample.
//
// aliasing_warning (optional) is set when the chest moves more than a quarter
// wavelength between consecutive chirps, which would defeat phase unwrapping.
inline AdcCube render_radar(const SimScenario& scn, const TimeSeries& effort,
                            bool* aliasing_warning = nullptr) {
  scn.validate();
  const RadarRenderConfig& cfg = scn.radar;
  const ChirpConfig& chirp = cfg.chirp;
  const std::size_t ns = chirp.samples_per_chirp;

  AdcCube cube;
  cube.config = chirp;
  cube.chirps = effort.size();
  cube.data.assign(cube.chirps * ns, {0.0, 0.0});

  if (aliasing_warning) *aliasing_warning = false;
  const double max_step = chirp.wavelength_m() / 4.0;

  Rng rng(derive_seed(scn.seed, "render-radar"));
  double prev_d = 0.0;
  for (std::size_t c = 0; c < cube.chirps; ++c) {
    const double now = effort.time_at(c);
    const double normalized =
        effort.samples[c] / scn.profile.amplitude *
        detail::motion_dropout_factor(scn, Modality::radar, now);
    const double excursion =
        detail::motion_excursion(scn, Modality::radar, now);
    const double d = cfg.displacement_m * (normalized + excursion);
    if (c > 0 && aliasing_warning && std::abs(d - prev_d) > max_step)
      *aliasing_warning = true;
    prev_d = d;

    const double range = cfg.target_range_m + d;
    // unambiguous range: beat frequency must stay below adc_rate / 2
    const double max_range = kSpeedOfLight * chirp.adc_rate_hz /
                             (4.0 * chirp.slope_hz_per_s);
    if (range <= 0.0 || range >= max_range)
      throw err::spec("radar target range outside (0, " +
                      std::to_string(max_range) + " m)");

    std::complex<double>* out = cube.data.data() + c * ns;
    const auto add_reflector = [&](double r_m, double amp) {
      const double t_d = 2.0 * r_m / kSpeedOfLight;
      const double phi0 = 2.0 * std::numbers::pi * chirp.f_c_hz * t_d +
                          std::numbers::pi * chirp.slope_hz_per_s * t_d * t_d;
      const double dphi = 2.0 * std::numbers::pi * chirp.slope_hz_per_s * t_d /
                          chirp.adc_rate_hz;
      // incremental rotation instead of per-sample trig
      const std::complex<double> rot(std::cos(dphi), std::sin(dphi));
      std::complex<double> ph(std::cos(phi0), std::sin(phi0));
      for (std::size_t n = 0; n < ns; ++n) {
        out[n] += amp * ph;
        ph *= rot;
      }
    };

    add_reflector(range, cfg.target_amplitude);
    for (const auto& [r_m, amp] : cfg.clutter) add_reflector(r_m, amp);

    if (cfg.noise_std > 0.0) {
      for (std::size_t n = 0; n < ns; ++n)
        out[n] += std::complex<double>(rng.normal(0.0, cfg.noise_std),
                                       rng.normal(0.0, cfg.noise_std));
    }
  }
  return cube;
}

}  // namespace somno
