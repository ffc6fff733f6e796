#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "somno/errors.hpp"
#include "somno/time_series.hpp"

namespace somno {

// Zero-phase FIR band-pass.
//
// Design: windowed-sinc (Hamming) band-pass kernel, difference of two ideal
// low-pass kernels with 6 dB cutoffs placed half a transition width outside
// the requested band so the band itself sits in the flat passband. The kernel
// is forced to zero sum (exact DC rejection) and normalized to unit gain at
// the band's geometric center. Hamming gives ~0.2% passband ripple and a
// -53 dB stopband per pass.
//
// Application: the symmetric kernel is applied centered, once forward and once
// backward, with odd (point-reflected) end padding. A symmetric kernel has
// exactly linear (zero, once centered) phase, so peak timing is preserved;
// the two passes square the magnitude response.
struct BandpassDesign {
  std::vector<double> kernel;  // odd length, symmetric
  double rate = 0.0;
  FrequencyBand band;
  double transition_hz = 0.0;

  std::size_t order() const { return kernel.empty() ? 0 : kernel.size() - 1; }
};

namespace detail {

inline double sinc_kernel_term(double fc_norm, long k) {
  // 2*fc*sinc(2*fc*k), the ideal low-pass impulse response
  if (k == 0) return 2.0 * fc_norm;
  const double x = 2.0 * std::numbers::pi * fc_norm * static_cast<double>(k);
  return std::sin(x) / (std::numbers::pi * static_cast<double>(k));
}

// Real magnitude response of a symmetric kernel at frequency f (Hz).
inline double kernel_gain(const std::vector<double>& h, double rate, double f) {
  const long half = static_cast<long>(h.size() / 2);
  double g = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double k = static_cast<double>(static_cast<long>(i) - half);
    g += h[i] * std::cos(2.0 * std::numbers::pi * f / rate * k);
  }
  return g;
}

// One centered pass with odd-reflection padding; output length == input length.
inline std::vector<double> convolve_centered(const std::vector<double>& h,
                                             const std::vector<double>& x) {
  const std::size_t n = x.size();
  const std::size_t half = h.size() / 2;
  std::vector<double> padded(n + 2 * half);
  for (std::size_t i = 0; i < half; ++i)
    padded[i] = 2.0 * x.front() - x[std::min(n - 1, half - i)];
  for (std::size_t i = 0; i < n; ++i) padded[half + i] = x[i];
  for (std::size_t i = 0; i < half; ++i)
    padded[half + n + i] = 2.0 * x.back() - x[n - 2 - std::min(n - 2, i)];

  std::vector<double> y(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    const double* px = padded.data() + t;
    for (std::size_t j = 0; j < h.size(); ++j) acc += h[j] * px[j];
    y[t] = acc;
  }
  return y;
}

}  // namespace detail

inline BandpassDesign design_bandpass(double rate, const FrequencyBand& band) {
  band.validate();
  if (!(rate > 2.0 * band.high))
    throw err::invalid_band("band high " + std::to_string(band.high) +
                            " Hz at or above Nyquist for rate " +
                            std::to_string(rate) + " Hz");

  // Transition width: half the low edge (stopband must end above 0 Hz),
  // capped by the band width and by the headroom to Nyquist.
  const double tw = std::min({band.low > 0.0 ? band.low / 2.0 : (band.high - band.low) / 2.0,
                              (band.high - band.low) / 2.0,
                              (rate / 2.0 - band.high) / 2.0});
  // Hamming window: transition ≈ 3.3 / N normalized
  std::size_t len = static_cast<std::size_t>(std::ceil(3.3 * rate / tw));
  if (len % 2 == 0) ++len;
  len = std::max<std::size_t>(len, 5);

  const double fc1 = std::max(0.0, band.low - tw / 2.0) / rate;
  const double fc2 = std::min(rate / 2.0, band.high + tw / 2.0) / rate;
  const long half = static_cast<long>(len / 2);

  std::vector<double> h(len);
  for (long k = -half; k <= half; ++k) {
    const double ideal = detail::sinc_kernel_term(fc2, k) -
                         detail::sinc_kernel_term(fc1, k);
    const double w =
        0.54 + 0.46 * std::cos(std::numbers::pi * static_cast<double>(k) /
                               static_cast<double>(half));
    h[static_cast<std::size_t>(k + half)] = ideal * w;
  }

  // Exact DC null, then unit gain at the geometric band center.
  double mean = 0.0;
  for (double v : h) mean += v;
  mean /= static_cast<double>(len);
  for (double& v : h) v -= mean;

  const double f0 = std::sqrt(std::max(band.low, 1e-12) * band.high);
  const double g0 = detail::kernel_gain(h, rate, f0);
  if (g0 > 0.0)
    for (double& v : h) v /= g0;

  return BandpassDesign{std::move(h), rate, band, tw};
}

inline TimeSeries bandpass(const TimeSeries& ts, const FrequencyBand& band) {
  const BandpassDesign design = design_bandpass(ts.rate, band);
  if (ts.size() < design.kernel.size())
    throw err::too_short("bandpass needs at least " +
                         std::to_string(design.kernel.size()) +
                         " samples (filter order " +
                         std::to_string(design.order()) + "), got " +
                         std::to_string(ts.size()));
  std::vector<double> y = detail::convolve_centered(design.kernel, ts.samples);
  y = detail::convolve_centered(design.kernel, y);  // backward pass
  return TimeSeries(std::move(y), ts.rate, ts.t0);
}

// Centered moving average with shrinking windows at the ends. Used as the
// optional pre-keypoint smoother and for envelope smoothing.
inline std::vector<double> moving_average(const std::vector<double>& x,
                                          std::size_t window) {
  const std::size_t n = x.size();
  if (window <= 1 || n == 0) return x;
  const std::size_t half = window / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    y[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return y;
}

}  // namespace somno
