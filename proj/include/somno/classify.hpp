#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "somno/errors.hpp"
#include "somno/time_series.hpp"

namespace somno {

// Per-sample apnea indicator for one modality. Both modalities must be
// rasterized onto the same grid before fusion.
struct BinaryIndicator {
  std::vector<std::uint8_t> on;
  double rate = 0.0;
  double t0 = 0.0;

  std::size_t size() const { return on.size(); }
  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / rate; }
};

// Sample i is true iff its timestamp falls inside some event interval
// [start, end). Events reaching outside [t0, t0 + span) are clipped;
// `clipped`, when given, counts them so callers can warn.
inline BinaryIndicator rasterize(const EventList& events, double rate,
                                 double span_s, double t0 = 0.0,
                                 std::size_t* clipped = nullptr) {
  if (!(rate > 0.0) || !(span_s >= 0.0))
    throw err::config("rasterize: rate must be > 0 and span >= 0");
  validate_events(events);
  BinaryIndicator ind;
  ind.rate = rate;
  ind.t0 = t0;
  ind.on.assign(static_cast<std::size_t>(std::floor(span_s * rate + 1e-9)), 0);
  if (clipped) *clipped = 0;
  for (const ApneaEvent& e : events) {
    const double lo = std::max(e.start_s, t0);
    const double hi = std::min(e.end_s, t0 + span_s);
    if (clipped && (e.start_s < t0 - 1e-9 || e.end_s > t0 + span_s + 1e-9))
      ++*clipped;
    if (hi <= lo) continue;
    auto first = static_cast<std::size_t>(std::ceil((lo - t0) * rate - 1e-9));
    for (std::size_t i = first; i < ind.on.size(); ++i) {
      if (ind.time_at(i) >= hi - 1e-9) break;
      ind.on[i] = 1;
    }
  }
  return ind;
}

// Multimodal OSA/CSA fusion.
//
// Per sample: CSA where both airflow (thermal) and effort (radar) indicate
// apnea, OSA where airflow indicates apnea but effort does not. A sample with
// no thermal indication is never classified, so thermal gates everything, and
// OSA/CSA co-assignment is impossible by construction.
//
// Per event: each contiguous thermal run lasting at least min_dur becomes the
// unit of scoring. Within it, same-kind sample runs shorter than min_dur are
// discarded; if runs of both kinds survive (an effort pause starting or
// ending mid-event), each surviving run is emitted separately. Otherwise one
// event spans the full thermal run and takes the kind of the majority samples
// among surviving runs — or among all runs when none survive — with ties
// resolved to CSA. Confidence is the winning kind's sample fraction within
// the thermal run.
inline std::vector<ApneaEvent> classify(const BinaryIndicator& thermal,
                                        const BinaryIndicator& radar,
                                        double min_dur_s = 10.0) {
  if (thermal.size() != radar.size() ||
      std::abs(thermal.rate - radar.rate) > 1e-12 ||
      std::abs(thermal.t0 - radar.t0) > 1e-12)
    throw err::alignment("classify: indicators must share rate, length and t0");

  const std::size_t n = thermal.size();
  const double rate = thermal.rate;
  std::vector<ApneaEvent> events;

  for (std::size_t i = 0; i < n;) {
    if (!thermal.on[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && thermal.on[j]) ++j;
    const double run_dur = static_cast<double>(j - i) / rate;
    if (run_dur >= min_dur_s) {
      // kind runs inside the thermal run
      struct KindRun {
        std::size_t begin, end;
        bool csa;
      };
      std::vector<KindRun> kruns;
      for (std::size_t a = i; a < j;) {
        const bool csa = radar.on[a] != 0;
        std::size_t b = a;
        while (b < j && (radar.on[b] != 0) == csa) ++b;
        kruns.push_back({a, b, csa});
        a = b;
      }

      std::vector<const KindRun*> surviving;
      for (const KindRun& kr : kruns)
        if (static_cast<double>(kr.end - kr.begin) / rate >= min_dur_s)
          surviving.push_back(&kr);

      bool mixed = false;
      if (surviving.size() >= 2) {
        for (const KindRun* kr : surviving)
          if (kr->csa != surviving.front()->csa) mixed = true;
      }

      if (mixed) {
        // effort pause boundary inside the event: emit each surviving run
        for (const KindRun* kr : surviving) {
          ApneaEvent e;
          e.start_s = thermal.time_at(kr->begin);
          e.end_s = thermal.time_at(kr->end);
          e.kind = kr->csa ? EventKind::csa : EventKind::osa;
          e.confidence = 1.0;
          events.push_back(e);
        }
      } else {
        std::size_t csa_samples = 0;
        std::size_t osa_samples = 0;
        std::vector<const KindRun*> scored = surviving;
        if (scored.empty())
          for (const KindRun& kr : kruns) scored.push_back(&kr);
        for (const KindRun* kr : scored) {
          if (kr->csa)
            csa_samples += kr->end - kr->begin;
          else
            osa_samples += kr->end - kr->begin;
        }
        ApneaEvent e;
        e.start_s = thermal.time_at(i);
        e.end_s = thermal.time_at(j);
        e.kind = csa_samples >= osa_samples ? EventKind::csa : EventKind::osa;
        const std::size_t win = std::max(csa_samples, osa_samples);
        e.confidence = static_cast<double>(win) / static_cast<double>(j - i);
        events.push_back(e);
      }
    }
    i = j;
  }
  return events;
}

}  // namespace somno
