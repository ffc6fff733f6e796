#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "somno/errors.hpp"
#include "somno/fft.hpp"
#include "somno/radiometry.hpp"  // kSpeedOfLight
#include "somno/spectral.hpp"
#include "somno/thermal.hpp"  // motion_compensated_derivative
#include "somno/time_series.hpp"

namespace somno {

struct ChirpConfig {
  double f_c_hz = 77e9;          // chirp start frequency
  double slope_hz_per_s = 8e13;  // frequency slope k
  double t_c_s = 50e-6;          // chirp duration
  double adc_rate_hz = 5.12e6;   // fast-time sample rate
  std::size_t samples_per_chirp = 256;
  double chirp_rate_hz = 30.0;   // slow-time sample rate

  void validate() const {
    if (!(f_c_hz > 0.0) || !(slope_hz_per_s > 0.0) || !(t_c_s > 0.0) ||
        !(adc_rate_hz > 0.0) || !(chirp_rate_hz > 0.0) ||
        samples_per_chirp == 0)
      throw err::config("ChirpConfig fields must all be positive");
    if (static_cast<double>(samples_per_chirp) > adc_rate_hz * t_c_s * (1.0 + 1e-9))
      throw err::config("samples_per_chirp exceeds adc_rate * t_c");
  }

  double bandwidth_hz() const { return slope_hz_per_s * t_c_s; }
  double wavelength_m() const { return kSpeedOfLight / f_c_hz; }
};

// Raw I/Q ADC samples, chirp-major: data[chirp * samples_per_chirp + n].
struct AdcCube {
  std::vector<std::complex<double>> data;
  std::size_t chirps = 0;
  ChirpConfig config;

  void validate() const {
    config.validate();
    if (data.size() != chirps * config.samples_per_chirp)
      throw err::config("AdcCube data size mismatch");
  }
};

// Per-chirp fast-time spectra, bin-major: value(bin, chirp). Only the
// non-negative beat-frequency half of the spectrum is retained; range bin b
// is centered at b * bin_spacing_m.
struct RangeMatrix {
  std::vector<std::complex<double>> data;  // bins * chirps
  std::size_t bins = 0;
  std::size_t chirps = 0;
  double bin_spacing_m = 0.0;
  ChirpConfig config;

  std::complex<double> at(std::size_t bin, std::size_t chirp) const {
    return data[bin * chirps + chirp];
  }
};

struct BinSelection {
  std::size_t index = 0;  // selected range bin i*
  double snr = 0.0;       // alpha at i*
  std::size_t window = 0; // searched window width M (bins)
};

// Per-chirp DFT over fast time with a Hann taper (sidelobe suppression keeps
// strong static clutter from leaking into the breather's bin). Beat frequency
// df maps to range R = c * df / (2k), so with an fft_length-point transform
// bin b sits at b * c/(2B) * samples_per_chirp/fft_length.
inline RangeMatrix range_matrix(const AdcCube& cube, std::size_t fft_length = 0) {
  cube.validate();
  const std::size_t ns = cube.config.samples_per_chirp;
  if (fft_length == 0) fft_length = ns;
  if (fft_length < ns)
    throw err::config("fft_length must be >= samples_per_chirp");

  std::vector<double> window(ns);
  for (std::size_t n = 0; n < ns; ++n)
    window[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi *
                                      static_cast<double>(n) /
                                      static_cast<double>(ns - 1)));

  RangeMatrix rm;
  rm.config = cube.config;
  rm.chirps = cube.chirps;
  rm.bins = fft_length / 2 + 1;
  rm.bin_spacing_m = kSpeedOfLight / (2.0 * cube.config.bandwidth_hz()) *
                     static_cast<double>(ns) / static_cast<double>(fft_length);
  rm.data.assign(rm.bins * rm.chirps, {0.0, 0.0});

  std::vector<cdouble> buf(fft_length);
  for (std::size_t c = 0; c < cube.chirps; ++c) {
    std::fill(buf.begin(), buf.end(), cdouble(0.0, 0.0));
    const std::complex<double>* chirp = cube.data.data() + c * ns;
    for (std::size_t n = 0; n < ns; ++n) buf[n] = chirp[n] * window[n];
    std::vector<cdouble> spec = dft(buf, false);
    for (std::size_t b = 0; b < rm.bins; ++b) rm.data[b * rm.chirps + c] = spec[b];
  }
  return rm;
}

// Slow-time phase of one range bin, unwrapped (2π-jump corrected).
//
// The IF beat tone's phase, evaluated at the fast-time window center, rides on
// the instantaneous carrier f_c + k*(Ns-1)/(2*f_adc) (mid-chirp), not on the
// chirp start frequency that the range-phase relation φ = 4πR/λ, λ = c/f_c is
// written against. The returned series is rescaled by
// f_c / (f_c + k*(Ns-1)/(2*f_adc)) so that a displacement r maps to a phase
// swing of 4π·r/λ exactly. With B/f_c ≈ 5% this correction is ~2.6%.
inline TimeSeries phase_series(const RangeMatrix& rm, std::size_t bin) {
  if (bin >= rm.bins)
    throw err::bounds("phase_series: bin " + std::to_string(bin) +
                      " out of range (" + std::to_string(rm.bins) + " bins)");
  const std::size_t n = rm.chirps;
  std::vector<double> phase(n, 0.0);
  double offset = 0.0;
  double prev = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double raw = std::arg(rm.at(bin, c));
    if (c > 0) {
      double d = raw - prev;
      while (d > std::numbers::pi) {
        d -= 2.0 * std::numbers::pi;
        offset -= 2.0 * std::numbers::pi;
      }
      while (d < -std::numbers::pi) {
        d += 2.0 * std::numbers::pi;
        offset += 2.0 * std::numbers::pi;
      }
    }
    prev = raw;
    phase[c] = raw + offset;
  }

  const double f_mid =
      rm.config.f_c_hz +
      rm.config.slope_hz_per_s *
          static_cast<double>(rm.config.samples_per_chirp - 1) /
          (2.0 * rm.config.adc_rate_hz);
  const double correction = rm.config.f_c_hz / f_mid;
  for (double& p : phase) p *= correction;
  return TimeSeries(std::move(phase), rm.config.chirp_rate_hz, 0.0);
}

// Pick the breathing bin: take a window of M bins around the bin with maximum
// mean magnitude (the strongest reflector, which in a bedside geometry is not
// necessarily the patient), compute each candidate's unwrapped phase and its
// in-band SNR alpha, and keep the bin with the highest alpha. The returned
// series is alpha * phase, post-processed with the window-averaged derivative
// to suppress motion and unwrapping artifacts.
//
// Alpha ties (exactly equal SNRs happen in noiseless data, where neighboring
// bins carry identical phase) resolve toward the bin nearest the max-power
// bin, then toward the lower index.
inline std::pair<BinSelection, TimeSeries> select_breathing_bin(
    const RangeMatrix& rm, std::size_t window_bins, const FrequencyBand& band,
    std::size_t signal_halfwidth = 1, std::size_t derivative_window = 0) {
  if (rm.bins == 0 || rm.chirps == 0)
    throw err::no_data("select_breathing_bin: empty range matrix");
  if (window_bins < 1) throw err::config("bin window M must be >= 1");

  std::size_t b_max = 0;
  double best_mag = -1.0;
  for (std::size_t b = 0; b < rm.bins; ++b) {
    double acc = 0.0;
    for (std::size_t c = 0; c < rm.chirps; ++c) acc += std::abs(rm.at(b, c));
    if (acc > best_mag) {
      best_mag = acc;
      b_max = b;
    }
  }

  const std::size_t half = window_bins / 2;
  const std::size_t lo = b_max >= half ? b_max - half : 0;
  const std::size_t hi = std::min(rm.bins - 1, b_max + half);

  BinSelection sel;
  sel.window = window_bins;
  TimeSeries best_phase;
  bool found = false;
  double best_alpha = -1.0;
  std::size_t best_dist = 0;
  for (std::size_t b = lo; b <= hi; ++b) {
    TimeSeries ph = phase_series(rm, b);
    const double alpha = band_snr(ph, band, signal_halfwidth);
    const std::size_t dist = b > b_max ? b - b_max : b_max - b;
    const bool better =
        !found || alpha > best_alpha ||
        (alpha == best_alpha && dist < best_dist);
    if (better) {
      found = true;
      best_alpha = alpha;
      best_dist = dist;
      sel.index = b;
      sel.snr = alpha;
      best_phase = std::move(ph);
    }
  }

  // alpha is infinite for noiseless input; SNR weighting is meaningless
  // there, so leave the phase unscaled in that degenerate case.
  const double scale = std::isfinite(best_alpha) ? best_alpha : 1.0;
  for (double& v : best_phase.samples) v *= scale;
  if (derivative_window == 0)
    derivative_window = derivative_window_for_rate(rm.config.chirp_rate_hz);
  TimeSeries out = motion_compensated_derivative(best_phase, derivative_window);
  return {sel, std::move(out)};
}

}  // namespace somno
