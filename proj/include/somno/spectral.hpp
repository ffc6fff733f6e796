#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "somno/errors.hpp"
#include "somno/fft.hpp"
#include "somno/time_series.hpp"

namespace somno {

// Dominant in-band frequency in breaths/minute.
//
// The spectrum is zero-padded to a bin width of <= 0.005 Hz (0.3 BPM) so the
// argmax quantization stays well under the reported sub-BPM errors. Argmax
// ties break toward the lower frequency. A series whose in-band power is
// below the numerical noise floor (< 1e-12 of total) has no rate to report.
inline double spectral_rate(const TimeSeries& ts, const FrequencyBand& band) {
  band.validate();
  if (ts.duration() < 30.0)
    throw err::too_short("spectral_rate needs >= 30 s of signal, got " +
                         std::to_string(ts.duration()) + " s");

  const std::size_t min_bins =
      static_cast<std::size_t>(std::ceil(ts.rate / 0.005));
  const std::size_t nfft = next_pow2(std::max(ts.size(), min_bins));
  // mean removal keeps a large DC offset from leaking across the band
  const std::vector<cdouble> spectrum =
      dft_real(ts.samples, nfft, /*zero_mean=*/true);

  const double bin_hz = ts.rate / static_cast<double>(nfft);
  double total = 0.0;
  for (std::size_t k = 0; k <= nfft / 2; ++k) total += std::norm(spectrum[k]);

  double in_band = 0.0;
  double best_power = -1.0;
  std::size_t best_bin = 0;
  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    const double f = bin_hz * static_cast<double>(k);
    if (f < band.low || f > band.high) continue;
    const double p = std::norm(spectrum[k]);
    in_band += p;
    if (p > best_power) {  // strict: first (lowest-frequency) max wins
      best_power = p;
      best_bin = k;
    }
  }

  if (total <= 0.0 || in_band < 1e-12 * total)
    throw err::no_signal("spectral_rate: no in-band power above noise floor");
  return 60.0 * bin_hz * static_cast<double>(best_bin);
}

// In-band SNR: power in a (2*halfwidth+1)-bin neighborhood of the in-band
// power argmax over the power in the remaining in-band bins. Computed at the
// series' natural spectral resolution (no padding) so the neighborhood width
// means the same thing regardless of series length.
inline double band_snr(const TimeSeries& ts, const FrequencyBand& band,
                       std::size_t signal_halfwidth = 1) {
  band.validate();
  if (ts.duration() < 30.0)
    throw err::too_short("band_snr needs >= 30 s of signal, got " +
                         std::to_string(ts.duration()) + " s");

  const std::size_t n = ts.size();
  const std::vector<cdouble> spectrum = dft_real(ts.samples, 0, /*zero_mean=*/true);
  const double bin_hz = ts.rate / static_cast<double>(n);

  std::vector<std::size_t> in_band;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double f = bin_hz * static_cast<double>(k);
    if (f >= band.low && f <= band.high) in_band.push_back(k);
  }
  if (in_band.size() < 2 * signal_halfwidth + 2)
    throw err::config(
        "band_snr: band too narrow for the series' spectral resolution (" +
        std::to_string(in_band.size()) + " in-band bins)");

  std::size_t best = 0;
  double best_power = -1.0;
  for (std::size_t i = 0; i < in_band.size(); ++i) {
    const double p = std::norm(spectrum[in_band[i]]);
    if (p > best_power) {
      best_power = p;
      best = i;
    }
  }

  double sig = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < in_band.size(); ++i) {
    const double p = std::norm(spectrum[in_band[i]]);
    const std::size_t dist = i > best ? i - best : best - i;
    if (dist <= signal_halfwidth)
      sig += p;
    else
      noise += p;
  }
  if (noise <= 0.0) return std::numeric_limits<double>::infinity();
  return sig / noise;
}

}  // namespace somno
