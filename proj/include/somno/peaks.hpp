#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "somno/errors.hpp"
#include "somno/time_series.hpp"

namespace somno {

// Interquartile range with linear-interpolated quartiles. Basis for the
// default peak prominence threshold.
inline double interquartile_range(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  std::vector<double> s(x);
  std::sort(s.begin(), s.end());
  auto quantile = [&s](double q) {
    const double pos = q * static_cast<double>(s.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return s[lo] * (1.0 - frac) + s[hi] * frac;
  };
  return quantile(0.75) - quantile(0.25);
}

// Default spacing constraint: one peak per breath at the fastest plausible
// breathing rate (36 breaths/min -> 0.6 Hz).
inline std::size_t default_min_distance(double rate) {
  return static_cast<std::size_t>(
      std::max(1.0, std::round(rate / 0.6)));
}

inline double default_min_prominence(const TimeSeries& ts) {
  return 0.05 * interquartile_range(ts.samples);
}

namespace detail {

// Local maxima candidates; plateaus report their middle sample.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& x) {
  std::vector<std::size_t> out;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (n >= 3 && i < n - 1) {
    if (x[i] > x[i - 1]) {
      std::size_t j = i;
      while (j + 1 < n && x[j + 1] == x[i]) ++j;  // plateau end
      if (j + 1 < n && x[j + 1] < x[i]) out.push_back((i + j) / 2);
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

// Prominence of a maximum: height above the higher of the two bases, where
// each base is the minimum between the peak and the nearest strictly higher
// sample (or the signal edge) on that side.
inline double peak_prominence(const std::vector<double>& x, std::size_t p) {
  const double h = x[p];
  double left_min = h;
  for (std::size_t i = p; i-- > 0;) {
    if (x[i] > h) break;
    left_min = std::min(left_min, x[i]);
  }
  double right_min = h;
  for (std::size_t i = p + 1; i < x.size(); ++i) {
    if (x[i] > h) break;
    right_min = std::min(right_min, x[i]);
  }
  return h - std::max(left_min, right_min);
}

}  // namespace detail

// Local extrema of the requested kind with at least the given prominence,
// thinned so surviving peaks are >= min_distance samples apart (taller peaks
// win; ties go to the lower index).
inline PeakList detect_peaks(const TimeSeries& ts, PeakKind kind,
                             double min_prominence, std::size_t min_distance) {
  if (min_distance < 1) throw err::config("detect_peaks: min_distance >= 1");
  if (min_prominence < 0.0)
    throw err::config("detect_peaks: min_prominence >= 0");

  // Minima are maxima of the negated signal.
  std::vector<double> work = ts.samples;
  if (kind == PeakKind::minima)
    for (double& v : work) v = -v;

  std::vector<std::size_t> cand = detail::local_maxima(work);
  std::vector<std::size_t> keep;
  keep.reserve(cand.size());
  for (std::size_t p : cand)
    if (detail::peak_prominence(work, p) >= min_prominence) keep.push_back(p);

  // Enforce min_distance: visit by descending height, drop anything within
  // range of an already-accepted peak.
  std::vector<std::size_t> order(keep.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return work[keep[a]] > work[keep[b]];
  });
  std::vector<char> removed(keep.size(), 0);
  for (std::size_t oi : order) {
    if (removed[oi]) continue;
    // neighbors are index-sorted in keep; scan outward
    for (std::size_t j = oi + 1;
         j < keep.size() && keep[j] - keep[oi] < min_distance; ++j)
      removed[j] = 1;
    for (std::size_t j = oi; j-- > 0 && keep[oi] - keep[j] < min_distance;)
      removed[j] = 1;
  }

  PeakList out;
  out.kind = kind;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (removed[i]) continue;
    out.indices.push_back(keep[i]);
    out.values.push_back(ts.samples[keep[i]]);
  }
  return out;
}

inline PeakList detect_peaks(const TimeSeries& ts, PeakKind kind) {
  return detect_peaks(ts, kind, default_min_prominence(ts),
                      default_min_distance(ts.rate));
}

// Piecewise-linear curve through the keypoints, constant beyond the first and
// last peak.
inline TimeSeries interpolate_envelope(const PeakList& peaks,
                                       std::size_t length, double rate,
                                       double t0 = 0.0) {
  if (peaks.empty())
    throw err::no_keypoints("interpolate_envelope: empty peak list");
  std::vector<double> y(length, 0.0);
  const auto& idx = peaks.indices;
  const auto& val = peaks.values;

  std::size_t seg = 0;
  for (std::size_t t = 0; t < length; ++t) {
    if (t <= idx.front()) {
      y[t] = val.front();
    } else if (t >= idx.back()) {
      y[t] = val.back();
    } else {
      while (seg + 1 < idx.size() && idx[seg + 1] < t) ++seg;
      const double x0 = static_cast<double>(idx[seg]);
      const double x1 = static_cast<double>(idx[seg + 1]);
      const double frac = (static_cast<double>(t) - x0) / (x1 - x0);
      y[t] = val[seg] * (1.0 - frac) + val[seg + 1] * frac;
    }
  }
  return TimeSeries(std::move(y), rate, t0);
}

}  // namespace somno
