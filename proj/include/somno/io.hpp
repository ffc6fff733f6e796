#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "somno/apnea.hpp"
#include "somno/classify.hpp"
#include "somno/errors.hpp"
#include "somno/radar.hpp"
#include "somno/rng.hpp"
#include "somno/sim.hpp"
#include "somno/thermal.hpp"
#include "somno/time_series.hpp"

namespace somno::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// low-level helpers
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw err::io("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw err::io("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw err::io("short write to " + path);
}

inline json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw err::io("invalid JSON in " + what);
  return j;
}

inline json load_json(const std::string& path) {
  return parse_json(read_file(path), path);
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string hash_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

// Raster files open with a 4-byte little-endian length followed by a UTF-8
// JSON header, then the payload.
inline void append_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t read_u32le(const std::string& bytes, std::size_t off) {
  if (off + 4 > bytes.size()) throw err::io("truncated header length");
  return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off])) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + 1])) << 8) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + 2])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + 3])) << 24);
}

inline void append_f32le(std::string& out, float v) {
  static_assert(sizeof(float) == 4);
  char raw[4];
  std::memcpy(raw, &v, 4);
  out.append(raw, 4);  // little-endian host assumed (see README)
}

inline float read_f32le(const std::string& bytes, std::size_t off) {
  if (off + 4 > bytes.size()) throw err::io("truncated float payload");
  float v;
  std::memcpy(&v, bytes.data() + off, 4);
  return v;
}

struct HeaderAndPayload {
  json header;
  std::size_t payload_offset;
};

inline HeaderAndPayload split_header(const std::string& bytes,
                                     const std::string& what) {
  const std::uint32_t len = read_u32le(bytes, 0);
  if (4 + static_cast<std::size_t>(len) > bytes.size())
    throw err::io("truncated JSON header in " + what);
  return {parse_json(bytes.substr(4, len), what), 4 + len};
}

// ---------------------------------------------------------------------------
// TimeSeries: CSV + JSON sidecar, and raw float32 binary
// ---------------------------------------------------------------------------

inline void write_series_csv(const std::string& csv_path,
                             const std::string& sidecar_path,
                             const TimeSeries& ts,
                             const std::string& unit = "") {
  std::string out = "t,value\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out += format_double(ts.time_at(i));
    out += ',';
    out += format_double(ts.samples[i]);
    out += '\n';
  }
  write_file(csv_path, out);
  json meta{{"rate_hz", ts.rate}, {"t0_s", ts.t0}, {"unit", unit}};
  write_file(sidecar_path, meta.dump(2) + "\n");
}

inline TimeSeries read_series_csv(const std::string& csv_path,
                                  const std::string& sidecar_path) {
  const json meta = load_json(sidecar_path);
  const std::string text = read_file(csv_path);
  std::vector<double> samples;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,value", 0) != 0)
    throw err::io("expected 't,value' header in " + csv_path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw err::io("malformed CSV row in " + csv_path);
    samples.push_back(std::stod(line.substr(comma + 1)));
  }
  return TimeSeries(std::move(samples), meta.at("rate_hz").get<double>(),
                    meta.at("t0_s").get<double>());
}

inline void write_series_binary(const std::string& path, const TimeSeries& ts,
                                const std::string& unit = "") {
  json meta{{"rate_hz", ts.rate}, {"t0_s", ts.t0}, {"unit", unit}};
  const std::string header = meta.dump();
  std::string out;
  append_u32le(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (double v : ts.samples) append_f32le(out, static_cast<float>(v));
  write_file(path, out);
}

inline TimeSeries read_series_binary(const std::string& path) {
  const std::string bytes = read_file(path);
  const auto [header, off] = split_header(bytes, path);
  const std::size_t n = (bytes.size() - off) / 4;
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i)
    samples[i] = static_cast<double>(read_f32le(bytes, off + 4 * i));
  return TimeSeries(std::move(samples), header.at("rate_hz").get<double>(),
                    header.at("t0_s").get<double>());
}

// ---------------------------------------------------------------------------
// FrameSequence: float32 raster, frame-major
// ---------------------------------------------------------------------------

inline void write_frames(const std::string& path, const FrameSequence& seq) {
  seq.validate();
  json meta{{"rate_hz", seq.rate},
            {"t0_s", seq.t0},
            {"height", seq.height},
            {"width", seq.width},
            {"count", seq.count}};
  const std::string header = meta.dump();
  std::string out;
  out.reserve(4 + header.size() + seq.data.size() * 4);
  append_u32le(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (float v : seq.data) append_f32le(out, v);
  write_file(path, out);
}

inline FrameSequence read_frames(const std::string& path) {
  const std::string bytes = read_file(path);
  const auto [header, off] = split_header(bytes, path);
  FrameSequence seq;
  seq.rate = header.at("rate_hz").get<double>();
  seq.t0 = header.at("t0_s").get<double>();
  seq.height = header.at("height").get<std::size_t>();
  seq.width = header.at("width").get<std::size_t>();
  seq.count = header.at("count").get<std::size_t>();
  const std::size_t n = seq.count * seq.height * seq.width;
  if (bytes.size() - off < n * 4)
    throw err::io("frame raster truncated in " + path);
  seq.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) seq.data[i] = read_f32le(bytes, off + 4 * i);
  seq.validate();
  return seq;
}

// ---------------------------------------------------------------------------
// AdcCube: interleaved float32 I/Q, chirp-major
// ---------------------------------------------------------------------------

inline void write_adc(const std::string& path, const AdcCube& cube) {
  cube.validate();
  json meta{{"f_c_hz", cube.config.f_c_hz},
            {"slope_hz_per_s", cube.config.slope_hz_per_s},
            {"t_c_s", cube.config.t_c_s},
            {"adc_rate_hz", cube.config.adc_rate_hz},
            {"samples_per_chirp", cube.config.samples_per_chirp},
            {"chirp_rate_hz", cube.config.chirp_rate_hz},
            {"chirps", cube.chirps}};
  const std::string header = meta.dump();
  std::string out;
  out.reserve(4 + header.size() + cube.data.size() * 8);
  append_u32le(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (const auto& z : cube.data) {
    append_f32le(out, static_cast<float>(z.real()));
    append_f32le(out, static_cast<float>(z.imag()));
  }
  write_file(path, out);
}

inline AdcCube read_adc(const std::string& path) {
  const std::string bytes = read_file(path);
  const auto [header, off] = split_header(bytes, path);
  AdcCube cube;
  cube.config.f_c_hz = header.at("f_c_hz").get<double>();
  cube.config.slope_hz_per_s = header.at("slope_hz_per_s").get<double>();
  cube.config.t_c_s = header.at("t_c_s").get<double>();
  cube.config.adc_rate_hz = header.at("adc_rate_hz").get<double>();
  cube.config.samples_per_chirp = header.at("samples_per_chirp").get<std::size_t>();
  cube.config.chirp_rate_hz = header.at("chirp_rate_hz").get<double>();
  cube.chirps = header.at("chirps").get<std::size_t>();
  const std::size_t n = cube.chirps * cube.config.samples_per_chirp;
  if (bytes.size() - off < n * 8)
    throw err::io("ADC payload truncated in " + path);
  cube.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double re = read_f32le(bytes, off + 8 * i);
    const double im = read_f32le(bytes, off + 8 * i + 4);
    cube.data[i] = {re, im};
  }
  cube.validate();
  return cube;
}

// ---------------------------------------------------------------------------
// Events, scores, scenario
// ---------------------------------------------------------------------------

inline json events_to_json(const EventList& events) {
  json arr = json::array();
  for (const ApneaEvent& e : events)
    arr.push_back(json{{"start_s", e.start_s},
                       {"end_s", e.end_s},
                       {"kind", to_string(e.kind)},
                       {"confidence", e.confidence}});
  return arr;
}

inline EventList events_from_json(const json& arr) {
  EventList events;
  for (const auto& j : arr) {
    ApneaEvent e;
    e.start_s = j.at("start_s").get<double>();
    e.end_s = j.at("end_s").get<double>();
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.confidence = j.value("confidence", 1.0);
    events.push_back(e);
  }
  validate_events(events);
  return events;
}

inline void write_events(const std::string& path, const EventList& events) {
  write_file(path, events_to_json(events).dump(2) + "\n");
}

inline EventList read_events(const std::string& path) {
  return events_from_json(load_json(path));
}

inline void write_score_csv(const std::string& path, const ApneaScore& score) {
  std::string out = "t,d_norm,masked\n";
  for (std::size_t i = 0; i < score.dnorm.size(); ++i) {
    out += format_double(score.dnorm.time_at(i));
    out += ',';
    out += format_double(score.dnorm.samples[i]);
    out += ',';
    out += score.masked[i] ? '1' : '0';
    out += '\n';
  }
  write_file(path, out);
}

inline void write_bland_altman_csv(
    const std::string& path,
    const std::vector<std::pair<double, double>>& points) {
  std::string out = "mean,diff\n";
  for (const auto& [m, d] : points) {
    out += format_double(m);
    out += ',';
    out += format_double(d);
    out += '\n';
  }
  write_file(path, out);
}

inline json roi_to_json(const RoiRect& roi) {
  return json{{"row0", roi.row0},
              {"col0", roi.col0},
              {"height", roi.height},
              {"width", roi.width}};
}

inline RoiRect roi_from_json(const json& j) {
  RoiRect roi;
  roi.row0 = j.at("row0").get<std::size_t>();
  roi.col0 = j.at("col0").get<std::size_t>();
  roi.height = j.at("height").get<std::size_t>();
  roi.width = j.at("width").get<std::size_t>();
  return roi;
}

inline json scenario_to_json(const SimScenario& scn) {
  json apneas = json::array();
  for (const auto& a : scn.apneas)
    apneas.push_back(json{{"start_s", a.start_s},
                          {"duration_s", a.duration_s},
                          {"kind", to_string(a.kind)},
                          {"airflow_attenuation", a.airflow_attenuation},
                          {"effort_attenuation", a.effort_attenuation},
                          {"ramp_s", a.ramp_s}});
  json motions = json::array();
  for (const auto& m : scn.motions) {
    const char* affected = m.affected == Modality::thermal ? "thermal"
                           : m.affected == Modality::radar ? "radar"
                                                           : "both";
    motions.push_back(json{{"time_s", m.time_s},
                           {"magnitude", m.magnitude},
                           {"duration_s", m.duration_s},
                           {"dropout_s", m.dropout_s},
                           {"dropout_residual", m.dropout_residual},
                           {"recovery_ramp_s", m.recovery_ramp_s},
                           {"affected", affected}});
  }
  json cal = json::array();
  for (const auto& [t, g] : scn.thermal.calibration_steps)
    cal.push_back(json{{"time_s", t}, {"gain", g}});
  json clutter = json::array();
  for (const auto& [r, a] : scn.radar.clutter)
    clutter.push_back(json{{"range_m", r}, {"amplitude", a}});

  return json{
      {"duration_s", scn.duration_s},
      {"seed", scn.seed},
      {"profile",
       {{"rate_bpm", scn.profile.rate_bpm},
        {"rate_jitter_bpm", scn.profile.rate_jitter_bpm},
        {"amplitude", scn.profile.amplitude},
        {"amplitude_jitter", scn.profile.amplitude_jitter},
        {"shape", scn.profile.shape}}},
      {"apneas", apneas},
      {"motions", motions},
      {"thermal",
       {{"height", scn.thermal.height},
        {"width", scn.thermal.width},
        {"roi", roi_to_json(scn.thermal.roi)},
        {"frame_rate_hz", scn.thermal.frame_rate_hz},
        {"base_temp_k", scn.thermal.base_temp_k},
        {"background_temp_k", scn.thermal.background_temp_k},
        {"swing_k", scn.thermal.swing_k},
        {"noise_std", scn.thermal.noise_std},
        {"emissivity", scn.thermal.emissivity},
        {"calibration_steps", cal}}},
      {"radar",
       {{"chirp",
         {{"f_c_hz", scn.radar.chirp.f_c_hz},
          {"slope_hz_per_s", scn.radar.chirp.slope_hz_per_s},
          {"t_c_s", scn.radar.chirp.t_c_s},
          {"adc_rate_hz", scn.radar.chirp.adc_rate_hz},
          {"samples_per_chirp", scn.radar.chirp.samples_per_chirp},
          {"chirp_rate_hz", scn.radar.chirp.chirp_rate_hz}}},
        {"target_range_m", scn.radar.target_range_m},
        {"target_amplitude", scn.radar.target_amplitude},
        {"displacement_m", scn.radar.displacement_m},
        {"clutter", clutter},
        {"noise_std", scn.radar.noise_std}}}};
}

inline SimScenario scenario_from_json(const json& j) {
  SimScenario scn;
  scn.duration_s = j.at("duration_s").get<double>();
  scn.seed = j.value("seed", 1ull);
  if (j.contains("profile")) {
    const json& p = j.at("profile");
    scn.profile.rate_bpm = p.value("rate_bpm", scn.profile.rate_bpm);
    scn.profile.rate_jitter_bpm = p.value("rate_jitter_bpm", scn.profile.rate_jitter_bpm);
    scn.profile.amplitude = p.value("amplitude", scn.profile.amplitude);
    scn.profile.amplitude_jitter = p.value("amplitude_jitter", scn.profile.amplitude_jitter);
    scn.profile.shape = p.value("shape", scn.profile.shape);
  }
  for (const auto& a : j.value("apneas", json::array())) {
    ApneaSpec spec;
    spec.start_s = a.at("start_s").get<double>();
    spec.duration_s = a.at("duration_s").get<double>();
    spec.kind = event_kind_from_string(a.at("kind").get<std::string>());
    spec.effort_attenuation = spec.kind == EventKind::osa ? 0.15 : 0.95;
    spec.airflow_attenuation = a.value("airflow_attenuation", spec.airflow_attenuation);
    spec.effort_attenuation = a.value("effort_attenuation", spec.effort_attenuation);
    spec.ramp_s = a.value("ramp_s", spec.ramp_s);
    scn.apneas.push_back(spec);
  }
  for (const auto& m : j.value("motions", json::array())) {
    MotionArtifactSpec spec;
    spec.time_s = m.at("time_s").get<double>();
    spec.magnitude = m.value("magnitude", spec.magnitude);
    spec.duration_s = m.value("duration_s", spec.duration_s);
    spec.dropout_s = m.value("dropout_s", spec.dropout_s);
    spec.dropout_residual = m.value("dropout_residual", spec.dropout_residual);
    spec.recovery_ramp_s = m.value("recovery_ramp_s", spec.recovery_ramp_s);
    const std::string affected = m.value("affected", std::string("both"));
    if (affected == "thermal") spec.affected = Modality::thermal;
    else if (affected == "radar") spec.affected = Modality::radar;
    else if (affected == "both") spec.affected = Modality::both;
    else throw err::config("motion artifact 'affected' must be thermal|radar|both");
    scn.motions.push_back(spec);
  }
  if (j.contains("thermal")) {
    const json& t = j.at("thermal");
    scn.thermal.height = t.value("height", scn.thermal.height);
    scn.thermal.width = t.value("width", scn.thermal.width);
    if (t.contains("roi")) scn.thermal.roi = roi_from_json(t.at("roi"));
    scn.thermal.frame_rate_hz = t.value("frame_rate_hz", scn.thermal.frame_rate_hz);
    scn.thermal.base_temp_k = t.value("base_temp_k", scn.thermal.base_temp_k);
    scn.thermal.background_temp_k = t.value("background_temp_k", scn.thermal.background_temp_k);
    scn.thermal.swing_k = t.value("swing_k", scn.thermal.swing_k);
    scn.thermal.noise_std = t.value("noise_std", scn.thermal.noise_std);
    scn.thermal.emissivity = t.value("emissivity", scn.thermal.emissivity);
    for (const auto& c : t.value("calibration_steps", json::array()))
      scn.thermal.calibration_steps.emplace_back(c.at("time_s").get<double>(),
                                                 c.at("gain").get<double>());
  }
  if (j.contains("radar")) {
    const json& r = j.at("radar");
    if (r.contains("chirp")) {
      const json& c = r.at("chirp");
      scn.radar.chirp.f_c_hz = c.value("f_c_hz", scn.radar.chirp.f_c_hz);
      scn.radar.chirp.slope_hz_per_s = c.value("slope_hz_per_s", scn.radar.chirp.slope_hz_per_s);
      scn.radar.chirp.t_c_s = c.value("t_c_s", scn.radar.chirp.t_c_s);
      scn.radar.chirp.adc_rate_hz = c.value("adc_rate_hz", scn.radar.chirp.adc_rate_hz);
      scn.radar.chirp.samples_per_chirp = c.value("samples_per_chirp", scn.radar.chirp.samples_per_chirp);
      scn.radar.chirp.chirp_rate_hz = c.value("chirp_rate_hz", scn.radar.chirp.chirp_rate_hz);
    }
    scn.radar.target_range_m = r.value("target_range_m", scn.radar.target_range_m);
    scn.radar.target_amplitude = r.value("target_amplitude", scn.radar.target_amplitude);
    scn.radar.displacement_m = r.value("displacement_m", scn.radar.displacement_m);
    for (const auto& c : r.value("clutter", json::array()))
      scn.radar.clutter.emplace_back(c.at("range_m").get<double>(),
                                     c.at("amplitude").get<double>());
    scn.radar.noise_std = r.value("noise_std", scn.radar.noise_std);
  }
  scn.validate();
  return scn;
}

}  // namespace somno::io
