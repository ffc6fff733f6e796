#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "somno/rng.hpp"
#include "somno/spectral.hpp"
#include "somno/thermal.hpp"

#include "support/oracles.hpp"

using namespace somno;
using Catch::Approx;

namespace {

FrameSequence constant_frames(std::size_t count, std::size_t h, std::size_t w,
                              float value, double rate = 30.0) {
  FrameSequence seq;
  seq.height = h;
  seq.width = w;
  seq.count = count;
  seq.rate = rate;
  seq.data.assign(count * h * w, value);
  return seq;
}

}  // namespace

TEST_CASE("roi_mean_series of constant frames") {
  FrameSequence seq = constant_frames(10, 4, 6, 100.0f);
  TimeSeries ts = roi_mean_series(seq, RoiRect{1, 2, 2, 3});
  REQUIRE(ts.size() == 10);
  for (double v : ts.samples) CHECK(v == Approx(100.0));
}

TEST_CASE("roi_mean_series averages arithmetic") {
  FrameSequence seq = constant_frames(1, 2, 2, 0.0f);
  // half pixels 0, half 2
  seq.data = {0.0f, 2.0f, 2.0f, 0.0f};
  TimeSeries ts = roi_mean_series(seq, RoiRect{0, 0, 2, 2});
  CHECK(ts.samples[0] == Approx(1.0));
}

TEST_CASE("roi bounds are enforced") {
  FrameSequence seq = constant_frames(2, 4, 4, 1.0f);
  CHECK_THROWS_AS(roi_mean_series(seq, RoiRect{2, 2, 3, 2}), Error);
  CHECK_THROWS_AS(roi_mean_series(seq, RoiRect{0, 0, 0, 2}), Error);
}

TEST_CASE("roi mean is invariant under pixel permutation inside the ROI") {
  Rng rng(3);
  FrameSequence seq = constant_frames(5, 6, 6, 0.0f);
  for (auto& v : seq.data) v = static_cast<float>(rng.normal());
  const RoiRect roi{1, 1, 4, 4};
  TimeSeries before = roi_mean_series(seq, roi);

  // shuffle pixels within the ROI of each frame (deterministic swaps)
  for (std::size_t t = 0; t < seq.count; ++t) {
    auto frame = seq.frame(t);
    for (std::size_t r = 0; r < roi.height; ++r)
      for (std::size_t c = 0; c < roi.width / 2; ++c) {
        const std::size_t a = (roi.row0 + r) * seq.width + roi.col0 + c;
        const std::size_t b = (roi.row0 + roi.height - 1 - r) * seq.width +
                              roi.col0 + roi.width - 1 - c;
        std::swap(frame[a], frame[b]);
      }
  }
  TimeSeries after = roi_mean_series(seq, roi);
  for (std::size_t i = 0; i < before.size(); ++i)
    REQUIRE(before.samples[i] == Approx(after.samples[i]).margin(1e-9));
}

TEST_CASE("derivative of a linear ramp is the slope") {
  const double a = 0.37;
  std::vector<double> x(300);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = a * static_cast<double>(i);
  TimeSeries y = motion_compensated_derivative(TimeSeries(std::move(x), 30.0), 25);
  REQUIRE(y.size() == 300 - 25);
  for (double v : y.samples) REQUIRE(v == Approx(a).margin(1e-12));
}

TEST_CASE("derivative of a constant is zero and t0 shifts") {
  TimeSeries y = motion_compensated_derivative(
      TimeSeries(std::vector<double>(100, 3.0), 30.0, 2.0), 25);
  REQUIRE(y.size() == 75);
  CHECK(y.t0 == Approx(2.0 + 13.0 / 30.0));
  for (double v : y.samples) REQUIRE(v == 0.0);
}

TEST_CASE("impulse is attenuated by the window factor") {
  std::vector<double> x(200, 0.0);
  x[100] = 1.0;
  TimeSeries y = motion_compensated_derivative(TimeSeries(std::move(x), 30.0), 25);
  double peak = 0.0;
  for (double v : y.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak <= 1.0 / 25.0 + 1e-12);
  CHECK(peak == Approx(1.0 / 25.0));
}

TEST_CASE("telescoped form equals the direct sum on random series") {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 60 + static_cast<std::size_t>(rng.uniform() * 200);
    std::vector<double> x(n);
    double acc = 0.0;
    for (auto& v : x) {
      acc += rng.normal();
      v = acc + 5.0 * rng.normal();
    }
    TimeSeries ts(std::move(x), 30.0);
    const std::size_t window = 25;
    TimeSeries fast = motion_compensated_derivative(ts, window);
    TimeSeries slow = oracle::derivative_direct_sum(ts, window);
    REQUIRE(fast.size() == slow.size());
    REQUIRE(fast.t0 == slow.t0);
    for (std::size_t i = 0; i < fast.size(); ++i)
      REQUIRE(std::abs(fast.samples[i] - slow.samples[i]) <= 1e-12);
  }
}

TEST_CASE("derivative preserves the frequency of a sinusoid") {
  const double rate = 30.0;
  std::vector<double> x(3600);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::sin(2.0 * std::numbers::pi * 0.25 * static_cast<double>(i) / rate);
  TimeSeries y = motion_compensated_derivative(TimeSeries(std::move(x), rate), 25);
  CHECK(spectral_rate(y, FrequencyBand(0.1, 0.5)) == Approx(15.0).margin(0.3));
}

TEST_CASE("derivative input validation") {
  TimeSeries short_ts(std::vector<double>(20, 1.0), 30.0);
  CHECK_THROWS_AS(motion_compensated_derivative(short_ts, 25), Error);
  TimeSeries ok(std::vector<double>(100, 1.0), 30.0);
  CHECK_THROWS_AS(motion_compensated_derivative(ok, 24), Error);  // even
  CHECK_THROWS_AS(motion_compensated_derivative(ok, 1), Error);   // too small
}

TEST_CASE("derivative window scales with the sample rate") {
  CHECK(derivative_window_for_rate(30.0) == 25);
  CHECK(derivative_window_for_rate(60.0) == 51);   // rounds to odd
  CHECK(derivative_window_for_rate(15.0) == 13);
  CHECK(derivative_window_for_rate(1.0) == 3);     // floor
}
