#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "somno/errors.hpp"
#include "somno/filter.hpp"
#include "somno/peaks.hpp"
#include "somno/time_series.hpp"

namespace somno {

// Per-sample motion flags aligned to a source series, plus the parameters
// that produced them.
struct MotionMask {
  std::vector<std::uint8_t> flagged;  // same length as the source series
  double rate = 0.0;
  double t0 = 0.0;
  std::size_t k = 0;
  double beta = 0.0;
  double guard_s = 0.0;

  bool any() const {
    return std::any_of(flagged.begin(), flagged.end(),
                       [](std::uint8_t f) { return f != 0; });
  }
};

// KNN peak motion filter. For keypoint i, the mean absolute difference of
// consecutive peak values over the K diffs nearest to i is compared against
// beta times the median consecutive-peak difference of the whole list; the
// median normalization makes the test dimensionless, so one beta works for
// both sensors and any signal scale. Flagged keypoints are removed and the
// mask marks +-guard_s around each of them. Because each keypoint's K-window
// overlaps its neighbors', a high-magnitude motion peak flags the chunk of
// keypoints around it, not just itself.
inline std::pair<PeakList, MotionMask> motion_filter(
    const PeakList& peaks, std::size_t series_length, double rate, double t0,
    std::size_t k = 10, double beta = 2.5, double guard_s = 2.0) {
  if (k < 2 || k % 2 != 0) throw err::config("motion_filter: K must be even and >= 2");
  if (peaks.size() <= k)
    throw err::insufficient_peaks("motion_filter needs more than K=" +
                                  std::to_string(k) + " peaks, got " +
                                  std::to_string(peaks.size()));

  const std::size_t p = peaks.size();
  std::vector<double> diffs(p - 1);
  for (std::size_t j = 0; j + 1 < p; ++j)
    diffs[j] = std::abs(peaks.values[j + 1] - peaks.values[j]);

  std::vector<double> sorted(diffs);
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  double median = sorted[sorted.size() / 2];
  if (sorted.size() % 2 == 0) {
    const double lower =
        *std::max_element(sorted.begin(), sorted.begin() + sorted.size() / 2);
    median = 0.5 * (median + lower);
  }
  const double threshold = beta * median;

  std::vector<char> flag(p, 0);
  const std::size_t half = k / 2;
  for (std::size_t i = 0; i < p; ++i) {
    // K consecutive diffs surrounding keypoint i, shifted inward at the ends
    std::size_t lo = i >= half ? i - half : 0;
    lo = std::min(lo, (p - 1) - k);
    double mean = 0.0;
    for (std::size_t j = lo; j < lo + k; ++j) mean += diffs[j];
    mean /= static_cast<double>(k);
    if (mean > threshold) flag[i] = 1;
  }

  PeakList kept;
  kept.kind = peaks.kind;
  MotionMask mask;
  mask.flagged.assign(series_length, 0);
  mask.rate = rate;
  mask.t0 = t0;
  mask.k = k;
  mask.beta = beta;
  mask.guard_s = guard_s;

  const long guard = static_cast<long>(std::lround(guard_s * rate));
  for (std::size_t i = 0; i < p; ++i) {
    if (!flag[i]) {
      kept.indices.push_back(peaks.indices[i]);
      kept.values.push_back(peaks.values[i]);
      continue;
    }
    const long center = static_cast<long>(peaks.indices[i]);
    const long lo = std::max<long>(0, center - guard);
    const long hi = std::min<long>(static_cast<long>(series_length) - 1,
                                   center + guard);
    for (long s = lo; s <= hi; ++s) mask.flagged[static_cast<std::size_t>(s)] = 1;
  }
  return {std::move(kept), std::move(mask)};
}

struct EnvelopePair {
  TimeSeries upper;
  TimeSeries lower;
  std::size_t window = 23;
};

// Envelopes from already-selected keypoints: linear interpolation to full
// length, a centered moving average of `window` samples, then a pointwise
// swap wherever smoothing made the envelopes cross.
inline EnvelopePair envelopes_from_peaks(const PeakList& maxima,
                                         const PeakList& minima,
                                         std::size_t length, double rate,
                                         double t0, std::size_t window = 23) {
  if (maxima.size() < 2 || minima.size() < 2)
    throw err::no_breathing_structure(
        "envelope construction needs at least 2 maxima and 2 minima, got " +
        std::to_string(maxima.size()) + "/" + std::to_string(minima.size()));
  TimeSeries upper = interpolate_envelope(maxima, length, rate, t0);
  TimeSeries lower = interpolate_envelope(minima, length, rate, t0);
  upper.samples = moving_average(upper.samples, window);
  lower.samples = moving_average(lower.samples, window);
  for (std::size_t i = 0; i < length; ++i) {
    if (upper.samples[i] < lower.samples[i])
      std::swap(upper.samples[i], lower.samples[i]);
  }
  return EnvelopePair{std::move(upper), std::move(lower), window};
}

// Convenience form detecting keypoints with the default prominence/distance
// settings (no motion filtering).
inline EnvelopePair envelopes(const TimeSeries& ts, std::size_t window = 23) {
  PeakList maxima = detect_peaks(ts, PeakKind::maxima);
  PeakList minima = detect_peaks(ts, PeakKind::minima);
  if (maxima.size() < 2 || minima.size() < 2)
    throw err::no_breathing_structure(
        "signal has too few extrema for envelope construction");
  return envelopes_from_peaks(maxima, minima, ts.size(), ts.rate, ts.t0, window);
}

// Envelope difference normalized by its mean. The mean excludes masked
// samples so a motion burst cannot deflate the score elsewhere; masked
// samples still carry a score value but are invalid for event extraction.
struct ApneaScore {
  TimeSeries dnorm;
  std::vector<std::uint8_t> masked;  // same length
  double mean_difference = 0.0;      // normalization constant actually used
};

inline ApneaScore apnea_score(const EnvelopePair& env,
                              const MotionMask* mask = nullptr) {
  const std::size_t n = env.upper.size();
  if (n == 0 || env.lower.size() != n)
    throw err::alignment("apnea_score: envelope lengths differ");
  if (mask && mask->flagged.size() != n)
    throw err::alignment("apnea_score: mask length differs from envelopes");

  std::vector<double> d(n);
  double sum = 0.0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = env.upper.samples[i] - env.lower.samples[i];
    if (!mask || !mask->flagged[i]) {
      sum += d[i];
      ++valid;
    }
  }
  if (valid == 0)
    throw err::no_valid_data("apnea_score: every sample is motion-masked");
  const double mean = sum / static_cast<double>(valid);
  if (!(mean > 0.0))
    throw err::no_valid_data("apnea_score: degenerate zero envelope difference");

  ApneaScore score;
  score.mean_difference = mean;
  for (double& v : d) v /= mean;
  score.dnorm = TimeSeries(std::move(d), env.upper.rate, env.upper.t0);
  score.masked.assign(n, 0);
  if (mask) score.masked = mask->flagged;
  return score;
}

// Apnea intervals: maximal runs of valid samples scoring below theta, with
// runs separated by sub-merge_gap gaps joined (the gap must itself be free of
// masked samples), kept when they last at least min_dur seconds with >= 90%
// of their samples below theta. Masked samples never join an event, so any
// interval that would span one is split instead. Confidence is
// 1 - mean(dnorm) over the interval, clamped to [0, 1].
inline std::vector<ApneaEvent> detect_events(const ApneaScore& score,
                                             double theta,
                                             double min_dur_s = 10.0,
                                             double merge_gap_s = 1.0) {
  if (!(theta > 0.0) || !(theta < 1.0))
    throw err::config("detect_events: theta must be in (0, 1)");
  const auto& d = score.dnorm.samples;
  const double rate = score.dnorm.rate;
  const std::size_t n = d.size();

  struct Run {
    std::size_t begin, end;  // [begin, end)
    std::size_t below;       // samples below theta
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < n;) {
    if (d[i] < theta && !score.masked[i]) {
      std::size_t j = i;
      while (j < n && d[j] < theta && !score.masked[j]) ++j;
      runs.push_back({i, j, j - i});
      i = j;
    } else {
      ++i;
    }
  }

  // merge across short, unmasked gaps
  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty()) {
      Run& prev = merged.back();
      const double gap_s =
          static_cast<double>(r.begin - prev.end) / rate;
      bool gap_masked = false;
      for (std::size_t i = prev.end; i < r.begin; ++i)
        if (score.masked[i]) { gap_masked = true; break; }
      if (gap_s < merge_gap_s && !gap_masked) {
        prev.end = r.end;
        prev.below += r.below;
        continue;
      }
    }
    merged.push_back(r);
  }

  std::vector<ApneaEvent> events;
  for (const Run& r : merged) {
    const std::size_t span = r.end - r.begin;
    const double dur = static_cast<double>(span) / rate;
    if (dur < min_dur_s) continue;
    const double frac =
        static_cast<double>(r.below) / static_cast<double>(span);
    if (frac < 0.9) continue;
    double mean = 0.0;
    for (std::size_t i = r.begin; i < r.end; ++i) mean += d[i];
    mean /= static_cast<double>(span);
    ApneaEvent e;
    e.start_s = score.dnorm.time_at(r.begin);
    e.end_s = score.dnorm.time_at(r.begin) + dur;
    e.kind = EventKind::unknown;
    e.confidence = std::clamp(1.0 - mean, 0.0, 1.0);
    events.push_back(e);
  }
  return events;
}

// Full single-modality detector: keypoints -> motion filter -> envelopes ->
// normalized score -> events.
struct ApneaDetectionParams {
  double theta = 0.3;
  double min_event_s = 10.0;
  double merge_gap_s = 1.0;
  std::size_t envelope_window = 23;
  bool motion_detection = true;
  std::size_t knn_k = 10;
  double knn_beta = 2.5;
  double guard_s = 2.0;
  // 0 = auto (0.05 * IQR / rate-derived distance)
  double min_prominence = 0.0;
  std::size_t min_distance = 0;
  std::size_t pre_smooth_window = 0;  // optional keypoint pre-denoiser
};

struct ApneaDetectionResult {
  ApneaScore score;
  MotionMask mask;
  PeakList maxima;
  PeakList minima;
  std::vector<ApneaEvent> events;
};

inline ApneaDetectionResult detect_apnea(const TimeSeries& breathing,
                                         const ApneaDetectionParams& params) {
  TimeSeries work = breathing;
  if (params.pre_smooth_window > 1)
    work.samples = moving_average(work.samples, params.pre_smooth_window);

  const double prom = params.min_prominence > 0.0 ? params.min_prominence
                                                  : default_min_prominence(work);
  const std::size_t dist = params.min_distance > 0
                               ? params.min_distance
                               : default_min_distance(work.rate);

  ApneaDetectionResult res;
  res.maxima = detect_peaks(work, PeakKind::maxima, prom, dist);
  res.minima = detect_peaks(work, PeakKind::minima, prom, dist);

  res.mask.flagged.assign(work.size(), 0);
  res.mask.rate = work.rate;
  res.mask.t0 = work.t0;
  if (params.motion_detection) {
    auto [kept_max, mask_max] =
        motion_filter(res.maxima, work.size(), work.rate, work.t0,
                      params.knn_k, params.knn_beta, params.guard_s);
    auto [kept_min, mask_min] =
        motion_filter(res.minima, work.size(), work.rate, work.t0,
                      params.knn_k, params.knn_beta, params.guard_s);
    res.maxima = std::move(kept_max);
    res.minima = std::move(kept_min);
    res.mask = std::move(mask_max);
    for (std::size_t i = 0; i < work.size(); ++i)
      if (mask_min.flagged[i]) res.mask.flagged[i] = 1;
  }

  EnvelopePair env =
      envelopes_from_peaks(res.maxima, res.minima, work.size(), work.rate,
                           work.t0, params.envelope_window);
  res.score = apnea_score(env, &res.mask);
  res.events = detect_events(res.score, params.theta, params.min_event_s,
                             params.merge_gap_s);
  return res;
}

}  // namespace somno
