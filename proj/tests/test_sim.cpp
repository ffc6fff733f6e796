#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "somno/sim.hpp"
#include "somno/spectral.hpp"
#include "somno/thermal.hpp"

#include "support/oracles.hpp"

using namespace somno;
using Catch::Approx;

namespace {
const FrequencyBand kBreathing{0.1, 0.5};
}

TEST_CASE("scenario validation") {
  SimScenario scn;
  ApneaSpec a;
  a.start_s = 50.0;
  a.duration_s = 20.0;
  a.kind = EventKind::csa;
  ApneaSpec b = a;
  b.start_s = 60.0;  // overlaps a
  scn.apneas = {a, b};
  CHECK_THROWS_AS(scn.validate(), Error);

  ApneaSpec bad_osa;
  bad_osa.kind = EventKind::osa;
  bad_osa.effort_attenuation = 0.95;  // inconsistent with OSA
  CHECK_THROWS_AS(bad_osa.validate(), Error);

  ApneaSpec short_apnea;
  short_apnea.duration_s = 8.0;
  CHECK_THROWS_AS(short_apnea.validate(), Error);
}

TEST_CASE("truth waveforms carry the configured rate") {
  SimScenario scn;
  scn.duration_s = 300.0;
  scn.profile.rate_bpm = 15.0;
  scn.profile.rate_jitter_bpm = 0.1;
  GroundTruth truth = gen_truth(scn);
  CHECK(spectral_rate(truth.airflow, kBreathing) == Approx(15.0).margin(0.3));
  CHECK(spectral_rate(truth.effort, kBreathing) == Approx(15.0).margin(0.3));
  CHECK(truth.events.empty());
}

TEST_CASE("CSA attenuates both waveforms") {
  SimScenario scn;
  scn.duration_s = 120.0;
  scn.seed = 5;
  scn.profile.amplitude_jitter = 0.02;
  ApneaSpec a;
  a.start_s = 50.0;
  a.duration_s = 20.0;
  a.kind = EventKind::csa;
  a.airflow_attenuation = 0.95;
  a.effort_attenuation = 0.95;
  a.ramp_s = 0.2;
  scn.apneas = {a};
  GroundTruth truth = gen_truth(scn);

  for (const TimeSeries* ts : {&truth.airflow, &truth.effort}) {
    const double inside = oracle::rms(*ts, 50.0, 70.0);
    const double outside = oracle::rms(*ts, 10.0, 45.0);
    REQUIRE(inside <= 0.10 * outside);
  }
  REQUIRE(truth.events.size() == 1);
  CHECK(truth.events[0].kind == EventKind::csa);
}

TEST_CASE("OSA attenuates airflow while effort continues") {
  SimScenario scn;
  scn.duration_s = 120.0;
  scn.seed = 6;
  scn.profile.amplitude_jitter = 0.02;
  ApneaSpec a;
  a.start_s = 50.0;
  a.duration_s = 20.0;
  a.kind = EventKind::osa;
  a.airflow_attenuation = 0.95;
  a.effort_attenuation = 0.15;
  a.ramp_s = 0.2;
  scn.apneas = {a};
  GroundTruth truth = gen_truth(scn);

  CHECK(oracle::rms(truth.airflow, 50.0, 70.0) <=
        0.10 * oracle::rms(truth.airflow, 10.0, 45.0));
  CHECK(oracle::rms(truth.effort, 50.0, 70.0) >=
        0.70 * oracle::rms(truth.effort, 10.0, 45.0));
}

TEST_CASE("injected apneas satisfy the amplitude-drop rule measurably") {
  SimScenario scn;
  scn.duration_s = 400.0;
  scn.seed = 17;
  scn.profile.amplitude_jitter = 0.03;
  for (int k = 0; k < 4; ++k) {
    ApneaSpec a;
    a.start_s = 60.0 + 80.0 * k;
    a.duration_s = 14.0 + 3.0 * k;
    a.kind = k % 2 == 0 ? EventKind::csa : EventKind::osa;
    a.airflow_attenuation = 0.95;
    a.effort_attenuation = a.kind == EventKind::csa ? 0.95 : 0.1;
    a.ramp_s = 0.2;
    scn.apneas.push_back(a);
  }
  GroundTruth truth = gen_truth(scn);
  for (const ApneaEvent& e : truth.events) {
    const double baseline = oracle::rms(truth.airflow, e.start_s - 30.0, e.start_s - 2.0);
    REQUIRE(oracle::amplitude_drop_rule(truth.airflow, e.start_s, e.end_s,
                                        baseline));
  }
}

TEST_CASE("generation is bit-reproducible for a fixed seed") {
  SimScenario scn;
  scn.duration_s = 60.0;
  scn.seed = 99;
  scn.thermal.height = 16;
  scn.thermal.width = 20;
  scn.thermal.roi = RoiRect{4, 5, 8, 10};
  MotionArtifactSpec m;
  m.time_s = 30.0;
  scn.motions = {m};

  GroundTruth t1 = gen_truth(scn);
  GroundTruth t2 = gen_truth(scn);
  REQUIRE(t1.airflow.samples == t2.airflow.samples);
  REQUIRE(t1.effort.samples == t2.effort.samples);

  FrameSequence f1 = render_thermal(scn, t1.airflow);
  FrameSequence f2 = render_thermal(scn, t2.airflow);
  REQUIRE(f1.data == f2.data);

  AdcCube c1 = render_radar(scn, t1.effort);
  AdcCube c2 = render_radar(scn, t2.effort);
  REQUIRE(c1.data == c2.data);
}

TEST_CASE("rendering order does not couple the sensor streams") {
  SimScenario scn;
  scn.duration_s = 30.0;
  scn.seed = 123;
  scn.thermal.height = 8;
  scn.thermal.width = 10;
  scn.thermal.roi = RoiRect{2, 2, 4, 5};
  GroundTruth truth = gen_truth(scn);

  FrameSequence frames_first = render_thermal(scn, truth.airflow);
  AdcCube cube_after = render_radar(scn, truth.effort);

  AdcCube cube_first = render_radar(scn, truth.effort);
  FrameSequence frames_after = render_thermal(scn, truth.airflow);

  REQUIRE(frames_first.data == frames_after.data);
  REQUIRE(cube_first.data == cube_after.data);
}

TEST_CASE("zero swing leaves no in-band thermal peak") {
  SimScenario scn;
  scn.duration_s = 60.0;
  scn.seed = 2;
  scn.thermal.height = 16;
  scn.thermal.width = 20;
  scn.thermal.roi = RoiRect{4, 5, 8, 10};
  scn.thermal.swing_k = 0.0;
  scn.thermal.noise_std = 0.2;
  GroundTruth truth = gen_truth(scn);
  FrameSequence frames = render_thermal(scn, truth.airflow);
  TimeSeries series = roi_mean_series(frames, scn.thermal.roi);
  // noise-only series: in-band SNR stays near the flat-spectrum ratio
  CHECK(band_snr(series, kBreathing, 1) < 10.0);
}

TEST_CASE("thermal pipeline recovers the breathing rate end to end") {
  SimScenario scn;
  scn.duration_s = 120.0;
  scn.seed = 8;
  scn.thermal.height = 16;
  scn.thermal.width = 20;
  scn.thermal.roi = RoiRect{4, 5, 8, 10};
  scn.thermal.swing_k = 0.5;
  scn.thermal.noise_std = 0.0;
  GroundTruth truth = gen_truth(scn);
  FrameSequence frames = render_thermal(scn, truth.airflow);
  TimeSeries series = roi_mean_series(frames, scn.thermal.roi);
  CHECK(spectral_rate(series, kBreathing) == Approx(15.0).margin(0.5));

  TimeSeries deriv = motion_compensated_derivative(series, 25);
  CHECK(spectral_rate(deriv, kBreathing) == Approx(15.0).margin(0.5));
}

TEST_CASE("calibration step leaves only a bounded derivative residual") {
  SimScenario base;
  base.duration_s = 120.0;
  base.seed = 4;
  base.thermal.height = 16;
  base.thermal.width = 20;
  base.thermal.roi = RoiRect{4, 5, 8, 10};
  base.thermal.noise_std = 0.0;

  SimScenario stepped = base;
  stepped.thermal.calibration_steps = {{60.0, 1.05}};

  GroundTruth truth = gen_truth(base);
  TimeSeries plain = roi_mean_series(render_thermal(base, truth.airflow),
                                     base.thermal.roi);
  TimeSeries with_step = roi_mean_series(
      render_thermal(stepped, truth.airflow), stepped.thermal.roi);

  const double step_height =
      with_step.samples.back() - plain.samples.back();
  REQUIRE(step_height > 0.0);

  TimeSeries d_plain = motion_compensated_derivative(plain, 25);
  TimeSeries d_step = motion_compensated_derivative(with_step, 25);
  double max_residual = 0.0;
  for (std::size_t i = 0; i < d_plain.size(); ++i)
    max_residual = std::max(
        max_residual, std::abs(d_step.samples[i] - d_plain.samples[i]));
  // the 5% gain step multiplies the post-step signal; its breathing-band
  // component adds ~5% of the modulation on top of the step residual
  const double mod_amp = [&] {
    double lo = 1e300, hi = -1e300;
    for (double v : plain.samples) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return 0.5 * (hi - lo);
  }();
  CHECK(max_residual <= step_height / 25.0 + 0.05 * mod_amp);
}

TEST_CASE("rendering is linear in radar amplitude and small thermal swing") {
  SimScenario scn;
  scn.duration_s = 30.0;
  scn.seed = 10;
  scn.thermal.height = 8;
  scn.thermal.width = 10;
  scn.thermal.roi = RoiRect{2, 2, 4, 5};
  scn.thermal.noise_std = 0.0;
  scn.thermal.swing_k = 0.5;
  scn.radar.noise_std = 0.0;
  GroundTruth truth = gen_truth(scn);

  // radar: exact linearity in reflector amplitude
  AdcCube c1 = render_radar(scn, truth.effort);
  SimScenario scn2 = scn;
  scn2.radar.target_amplitude = 2.0;
  AdcCube c2 = render_radar(scn2, truth.effort);
  for (std::size_t i = 0; i < c1.data.size(); ++i)
    REQUIRE(std::abs(c2.data[i] - 2.0 * c1.data[i]) < 1e-9);

  // thermal: swing <= 1 K behaves linearly within 1%
  TimeSeries s1 = roi_mean_series(render_thermal(scn, truth.airflow),
                                  scn.thermal.roi);
  SimScenario scn3 = scn;
  scn3.thermal.swing_k = 1.0;
  TimeSeries s2 = roi_mean_series(render_thermal(scn3, truth.airflow),
                                  scn.thermal.roi);
  double mean1 = 0.0, mean2 = 0.0;
  for (double v : s1.samples) mean1 += v;
  for (double v : s2.samples) mean2 += v;
  mean1 /= static_cast<double>(s1.size());
  mean2 /= static_cast<double>(s2.size());
  double peak2 = 0.0;
  for (double v : s2.samples) peak2 = std::max(peak2, std::abs(v - mean2));
  double rms1 = 0.0, rms2 = 0.0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    const double dev1 = s1.samples[i] - mean1;
    const double dev2 = s2.samples[i] - mean2;
    rms1 += dev1 * dev1;
    rms2 += dev2 * dev2;
    // pointwise error relative to the modulation scale
    REQUIRE(std::abs(dev2 - 2.0 * dev1) <= 0.01 * peak2);
  }
  CHECK(std::sqrt(rms2) == Approx(2.0 * std::sqrt(rms1)).epsilon(0.01));
}

TEST_CASE("radar aliasing warning fires for violent displacement") {
  SimScenario scn;
  scn.duration_s = 30.0;
  scn.radar.displacement_m = 0.02;  // 20 mm at 15 BPM: > lambda/4 per chirp
  scn.radar.chirp.chirp_rate_hz = 5.0;
  scn.thermal.frame_rate_hz = 5.0;
  GroundTruth truth = gen_truth(scn);
  bool warn = false;
  render_radar(scn, truth.effort, &warn);
  CHECK(warn);

  SimScenario mild = scn;
  mild.radar.displacement_m = 0.0005;
  GroundTruth truth2 = gen_truth(mild);
  warn = false;
  render_radar(mild, truth2.effort, &warn);
  CHECK_FALSE(warn);
}
