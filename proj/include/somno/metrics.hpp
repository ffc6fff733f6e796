#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "somno/errors.hpp"
#include "somno/time_series.hpp"

namespace somno {

// Paired per-window breathing-rate estimates (BPM).
struct RrComparison {
  std::vector<double> estimated;
  std::vector<double> ground_truth;
  double window_s = 60.0;
  double stride_s = 15.0;
};

struct RrMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double mape_pct = 0.0;
};

inline RrMetrics rr_metrics(const RrComparison& cmp) {
  const std::size_t n = cmp.estimated.size();
  if (n == 0 || cmp.ground_truth.size() != n)
    throw err::alignment("rr_metrics: need equal-length non-empty pair lists");
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  double pct_sum = 0.0;
  std::string zero_windows;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = cmp.estimated[i] - cmp.ground_truth[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    if (cmp.ground_truth[i] == 0.0) {
      if (!zero_windows.empty()) zero_windows += ", ";
      zero_windows += std::to_string(i);
    } else {
      pct_sum += std::abs(e) / std::abs(cmp.ground_truth[i]);
    }
  }
  if (!zero_windows.empty())
    throw err::division("rr_metrics: MAPE undefined, zero ground truth in windows " +
                        zero_windows);
  RrMetrics m;
  m.mae = abs_sum / static_cast<double>(n);
  m.rmse = std::sqrt(sq_sum / static_cast<double>(n));
  m.mape_pct = 100.0 * pct_sum / static_cast<double>(n);
  return m;
}

struct BlandAltmanStats {
  double mean_diff = 0.0;
  double sd_diff = 0.0;  // sample SD (n-1)
  double loa_low = 0.0;  // mean - 1.96 sd
  double loa_high = 0.0; // mean + 1.96 sd
  std::vector<std::pair<double, double>> points;  // (pair mean, difference)
};

inline BlandAltmanStats bland_altman(const std::vector<double>& a,
                                     const std::vector<double>& b) {
  if (a.size() != b.size())
    throw err::alignment("bland_altman: input lengths differ");
  const std::size_t n = a.size();
  if (n < 2) throw err::too_short("bland_altman needs at least 2 pairs");

  BlandAltmanStats s;
  s.points.reserve(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s.points.emplace_back(0.5 * (a[i] + b[i]), d);
    mean += d;
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const auto& [m, d] : s.points) ss += (d - mean) * (d - mean);
  s.mean_diff = mean;
  s.sd_diff = std::sqrt(ss / static_cast<double>(n - 1));
  s.loa_low = mean - 1.96 * s.sd_diff;
  s.loa_high = mean + 1.96 * s.sd_diff;
  return s;
}

// Oversampled chunk boundaries: sliding windows of `chunk_s` seconds at a
// stride of block_s / per_block (20 per 5 minutes -> 15 s). Windows that
// would run past the end are discarded, so any aligned block_s span of a
// sufficiently long stream contains exactly per_block window starts.
inline std::vector<std::pair<double, double>> chunk_windows(
    double total_duration_s, double chunk_s = 60.0, std::size_t per_block = 20,
    double block_s = 300.0) {
  if (!(chunk_s > 0.0) || per_block == 0 || !(block_s > 0.0))
    throw err::config("chunk_windows: invalid chunking parameters");
  const double stride = block_s / static_cast<double>(per_block);
  std::vector<std::pair<double, double>> windows;
  for (std::size_t k = 0;; ++k) {
    const double start = stride * static_cast<double>(k);
    if (start + chunk_s > total_duration_s + 1e-9) break;
    windows.emplace_back(start, start + chunk_s);
  }
  return windows;
}

// Chunk is positive iff it overlaps any single event by at least
// overlap_rule_s seconds.
inline std::vector<std::uint8_t> chunk_labels(
    const EventList& events,
    const std::vector<std::pair<double, double>>& windows,
    double overlap_rule_s = 5.0) {
  std::vector<std::uint8_t> labels(windows.size(), 0);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    for (const ApneaEvent& e : events) {
      if (interval_overlap(windows[i].first, windows[i].second, e.start_s,
                           e.end_s) >= overlap_rule_s - 1e-12) {
        labels[i] = 1;
        break;
      }
    }
  }
  return labels;
}

struct DetectionOutcome {
  std::vector<std::uint8_t> predicted;
  std::vector<std::uint8_t> ground_truth;
};

// Chunk-level detection metrics. Degenerate denominators yield an absent
// value, never a silent zero. ICC is the one-way random, single-measure form
// over the paired binary vectors: with two measurements per chunk,
// (MSB - MSW) / (MSB + MSW).
struct DetectionMetrics {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> icc;
};

inline DetectionMetrics detection_metrics(const DetectionOutcome& out) {
  const std::size_t n = out.predicted.size();
  if (out.ground_truth.size() != n)
    throw err::alignment("detection_metrics: vector lengths differ");
  if (n < 2) throw err::too_short("detection_metrics needs >= 2 chunks");

  DetectionMetrics m;
  for (std::size_t i = 0; i < n; ++i) {
    const bool p = out.predicted[i] != 0;
    const bool g = out.ground_truth[i] != 0;
    if (p && g) ++m.tp;
    else if (!p && !g) ++m.tn;
    else if (p && !g) ++m.fp;
    else ++m.fn;
  }
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(n);
  if (m.tp + m.fp > 0)
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  if (m.tp + m.fn > 0)
    m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0)
    m.f1 = 2.0 * (*m.precision) * (*m.recall) / (*m.precision + *m.recall);

  // One-way ANOVA with k = 2 raters per target
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    grand += 0.5 * (static_cast<double>(out.predicted[i] != 0) +
                    static_cast<double>(out.ground_truth[i] != 0));
  grand /= static_cast<double>(n);
  double ssb = 0.0;
  double ssw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = out.predicted[i] != 0 ? 1.0 : 0.0;
    const double g = out.ground_truth[i] != 0 ? 1.0 : 0.0;
    const double target_mean = 0.5 * (p + g);
    ssb += (target_mean - grand) * (target_mean - grand);
    ssw += (p - target_mean) * (p - target_mean) +
           (g - target_mean) * (g - target_mean);
  }
  const double msb = 2.0 * ssb / static_cast<double>(n - 1);
  const double msw = ssw / static_cast<double>(n);  // n targets * (k-1)
  if (msb + msw > 0.0) m.icc = (msb - msw) / (msb + msw);
  return m;
}

// Greedy one-to-one interval matching by descending IoU.
struct EventMatching {
  std::size_t tp = 0, fp = 0, fn = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (pred, gt)
};

inline EventMatching event_matching(const EventList& predicted,
                                    const EventList& ground_truth,
                                    double min_iou = 0.3) {
  validate_events(predicted);
  validate_events(ground_truth);

  struct Cand {
    double iou;
    std::size_t p, g;
  };
  std::vector<Cand> cands;
  for (std::size_t p = 0; p < predicted.size(); ++p) {
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      const double iou =
          interval_iou(predicted[p].start_s, predicted[p].end_s,
                       ground_truth[g].start_s, ground_truth[g].end_s);
      if (iou >= min_iou) cands.push_back({iou, p, g});
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.g != b.g) return a.g < b.g;
    return a.p < b.p;
  });

  std::vector<char> used_p(predicted.size(), 0);
  std::vector<char> used_g(ground_truth.size(), 0);
  EventMatching m;
  for (const Cand& c : cands) {
    if (used_p[c.p] || used_g[c.g]) continue;
    used_p[c.p] = 1;
    used_g[c.g] = 1;
    m.pairs.emplace_back(c.p, c.g);
  }
  m.tp = m.pairs.size();
  m.fp = predicted.size() - m.tp;
  m.fn = ground_truth.size() - m.tp;
  return m;
}

}  // namespace somno
