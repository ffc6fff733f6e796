#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "somno/errors.hpp"
#include "somno/time_series.hpp"

namespace somno {

struct RoiRect {
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  void validate_within(std::size_t frame_h, std::size_t frame_w) const {
    if (height < 1 || width < 1)
      throw err::bounds("ROI must be at least 1x1");
    if (row0 + height > frame_h || col0 + width > frame_w)
      throw err::bounds("ROI exceeds frame bounds");
  }
};

// Time-ordered stack of 2-D intensity frames, frame-major. Samples are stored
// as float (matching the on-disk raster); all arithmetic on them is double.
struct FrameSequence {
  std::vector<float> data;  // count * height * width
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t count = 0;
  double rate = 0.0;  // Hz
  double t0 = 0.0;    // s

  void validate() const {
    if (!(rate > 0.0)) throw err::domain("FrameSequence rate must be > 0");
    if (data.size() != count * height * width)
      throw err::domain("FrameSequence data size mismatch");
  }

  std::span<const float> frame(std::size_t t) const {
    return {data.data() + t * height * width, height * width};
  }
  std::span<float> frame(std::size_t t) {
    return {data.data() + t * height * width, height * width};
  }
};

// Spatial mean of each frame restricted to the ROI.
inline TimeSeries roi_mean_series(const FrameSequence& seq, const RoiRect& roi) {
  seq.validate();
  roi.validate_within(seq.height, seq.width);
  std::vector<double> out(seq.count, 0.0);
  const double inv = 1.0 / static_cast<double>(roi.height * roi.width);
  for (std::size_t t = 0; t < seq.count; ++t) {
    const float* f = seq.data.data() + t * seq.height * seq.width;
    double acc = 0.0;
    for (std::size_t r = roi.row0; r < roi.row0 + roi.height; ++r) {
      const float* row = f + r * seq.width + roi.col0;
      for (std::size_t c = 0; c < roi.width; ++c) acc += row[c];
    }
    out[t] = acc * inv;
  }
  return TimeSeries(std::move(out), seq.rate, seq.t0);
}

// Window-averaged first difference:
//
//   y[t] = (1/N) sum_{i=-floor(N/2)}^{floor(N/2)} (x[t+i] - x[t+i-1])
//
// which telescopes to (x[t + floor(N/2)] - x[t - floor(N/2) - 1]) / N. A
// motion spike or a camera recalibration step of height D contributes at most
// D/N to the output, while slow breathing trends pass as their per-sample
// slope. Samples whose window would overrun either end are dropped (the
// window spans N+1 input samples, so the output is N samples shorter and t0
// advances by floor(N/2)+1 samples).
inline TimeSeries motion_compensated_derivative(const TimeSeries& ts,
                                                std::size_t window = 25) {
  if (window < 3 || window % 2 == 0)
    throw err::config("derivative window must be odd and >= 3");
  if (ts.size() < window + 2)
    throw err::too_short("motion_compensated_derivative needs more than " +
                         std::to_string(window + 1) + " samples, got " +
                         std::to_string(ts.size()));
  const std::size_t half = window / 2;
  const std::size_t first = half + 1;
  const std::size_t last = ts.size() - 1 - half;  // inclusive
  std::vector<double> y(last - first + 1);
  const double inv = 1.0 / static_cast<double>(window);
  for (std::size_t t = first; t <= last; ++t)
    y[t - first] = (ts.samples[t + half] - ts.samples[t - half - 1]) * inv;
  return TimeSeries(std::move(y), ts.rate,
                    ts.t0 + static_cast<double>(first) / ts.rate);
}

// The 25-sample default assumes 30 Hz; other rates keep the same ~0.83 s
// temporal extent.
inline std::size_t derivative_window_for_rate(double rate) {
  long n = std::lround(25.0 * rate / 30.0);
  if (n % 2 == 0) ++n;
  return static_cast<std::size_t>(std::max<long>(n, 3));
}

}  // namespace somno
