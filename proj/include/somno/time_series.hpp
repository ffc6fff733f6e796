#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "somno/errors.hpp"

namespace somno {

// Uniformly sampled real-valued signal. The universal currency of the
// pipeline: every stage consumes and produces one of these.
struct TimeSeries {
  std::vector<double> samples;
  double rate = 0.0;  // Hz
  double t0 = 0.0;    // seconds, time of samples[0]

  TimeSeries() = default;

  TimeSeries(std::vector<double> s, double rate_hz, double t0_s = 0.0)
      : samples(std::move(s)), rate(rate_hz), t0(t0_s) {
    validate();
  }

  void validate() const {
    if (!(rate > 0.0)) throw err::domain("TimeSeries rate must be > 0 Hz");
    for (double v : samples) {
      if (!std::isfinite(v))
        throw err::domain("TimeSeries samples must be finite");
    }
  }

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration() const { return static_cast<double>(samples.size()) / rate; }
  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / rate; }
  double end_time() const { return t0 + duration(); }
};

// Samples with time_at(i) in [t_start, t_end). Metadata (rate) preserved.
inline TimeSeries slice(const TimeSeries& ts, double t_start, double t_end) {
  std::vector<double> out;
  if (t_end > t_start && !ts.empty()) {
    auto first = static_cast<long>(std::ceil((t_start - ts.t0) * ts.rate - 1e-9));
    first = std::max<long>(first, 0);
    const double new_t0 = ts.t0 + static_cast<double>(first) / ts.rate;
    for (std::size_t i = static_cast<std::size_t>(first); i < ts.size(); ++i) {
      if (ts.time_at(i) >= t_end - 1e-9) break;
      out.push_back(ts.samples[i]);
    }
    if (!out.empty()) return TimeSeries(std::move(out), ts.rate, new_t0);
  }
  TimeSeries empty_ts;
  empty_ts.rate = ts.rate;
  empty_ts.t0 = t_start;
  return empty_ts;
}

struct FrequencyBand {
  double low = 0.0;   // Hz
  double high = 0.0;  // Hz

  FrequencyBand() = default;
  FrequencyBand(double lo, double hi) : low(lo), high(hi) { validate(); }

  void validate() const {
    if (!(low >= 0.0) || !(low < high))
      throw err::invalid_band("FrequencyBand requires 0 <= low < high");
  }
};

enum class PeakKind { minima, maxima };

// Local extrema of a signal: strictly increasing sample indices with the
// source value at each index.
struct PeakList {
  std::vector<std::size_t> indices;
  std::vector<double> values;
  PeakKind kind = PeakKind::maxima;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

enum class EventKind { unknown, osa, csa };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::osa: return "OSA";
    case EventKind::csa: return "CSA";
    default: return "unknown";
  }
}

inline EventKind event_kind_from_string(const std::string& s) {
  if (s == "OSA") return EventKind::osa;
  if (s == "CSA") return EventKind::csa;
  if (s == "unknown") return EventKind::unknown;
  throw err::domain("unknown apnea event kind '" + s + "'");
}

// Annotated interval, used both for ground truth and predictions.
struct ApneaEvent {
  double start_s = 0.0;
  double end_s = 0.0;
  EventKind kind = EventKind::unknown;
  double confidence = 1.0;  // [0, 1]

  double duration() const { return end_s - start_s; }
};

using EventList = std::vector<ApneaEvent>;

// Throws unless events are sorted by start and non-overlapping.
inline void validate_events(const EventList& events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.end_s - e.start_s < 0.0)
      throw err::domain("event has negative duration");
    if (e.confidence < 0.0 || e.confidence > 1.0)
      throw err::domain("event confidence outside [0, 1]");
    if (i > 0 && events[i - 1].end_s > e.start_s + 1e-12)
      throw err::domain("events must be sorted and non-overlapping");
  }
}

inline double interval_overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

inline double interval_iou(double a0, double a1, double b0, double b1) {
  const double inter = interval_overlap(a0, a1, b0, b1);
  const double uni = std::max(a1, b1) - std::min(a0, b0);
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace somno
