// somno command-line tool: simulate synthetic sleep recordings, run the
// thermal and radar breathing pipelines, fuse apnea detections into OSA/CSA
// labels, and evaluate against ground truth.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "somno/app.hpp"

namespace {

int error_exit(const std::string& code, const std::string& message) {
  nlohmann::json j{{"error", {{"code", code}, {"message", message}}}};
  std::fprintf(stderr, "%s\n", j.dump().c_str());
  if (code == "usage" || code == "config" || code == "invalid-band")
    return 2;
  if (code == "io") return 3;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"somno - contactless sleep apnea signal-processing toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool demo = false;

  const auto add_common = [&](CLI::App* sub, bool allow_demo) {
    sub->add_option("--config", config_path, "run configuration (JSON)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the scenario/config seed");
    if (allow_demo)
      sub->add_flag("--demo", demo, "use the bundled demo scenario");
  };

  CLI::App* simulate = app.add_subcommand(
      "simulate", "generate ground truth plus rendered thermal/radar data");
  add_common(simulate, true);
  CLI::App* analyze_thermal = app.add_subcommand(
      "analyze-thermal", "thermal frames -> breathing waveform -> apnea events");
  add_common(analyze_thermal, false);
  CLI::App* analyze_radar = app.add_subcommand(
      "analyze-radar", "radar ADC -> breathing waveform -> apnea events");
  add_common(analyze_radar, false);
  CLI::App* classify = app.add_subcommand(
      "classify", "fuse per-modality events into OSA/CSA labels");
  add_common(classify, false);
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "metrics report against ground truth");
  add_common(evaluate, false);
  CLI::App* end_to_end = app.add_subcommand(
      "end-to-end", "simulate, analyze both modalities, classify, evaluate");
  add_common(end_to_end, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  somno::RunMode mode;
  if (simulate->parsed()) mode = somno::RunMode::simulate;
  else if (analyze_thermal->parsed()) mode = somno::RunMode::analyze_thermal;
  else if (analyze_radar->parsed()) mode = somno::RunMode::analyze_radar;
  else if (classify->parsed()) mode = somno::RunMode::classify_events;
  else if (evaluate->parsed()) mode = somno::RunMode::evaluate;
  else mode = somno::RunMode::end_to_end;

  try {
    somno::RunConfig cfg;
    if (!config_path.empty()) {
      cfg = somno::load_run_config(config_path);
    } else if (demo) {
      cfg.scenario = somno::demo_scenario();
      cfg.raw = nlohmann::json{
          {"scenario", somno::io::scenario_to_json(*cfg.scenario)}};
    } else {
      throw somno::err::usage("either --config or --demo is required");
    }
    if (demo && !cfg.scenario) cfg.scenario = somno::demo_scenario();

    somno::RunResult result = somno::run(mode, cfg, out_dir, seed);
    std::printf("%s: wrote %zu artifacts to %s\n", somno::to_string(mode),
                result.outputs.size(), out_dir.c_str());
    return 0;
  } catch (const somno::Error& e) {
    return error_exit(e.code(), e.what());
  } catch (const std::exception& e) {
    return error_exit("internal", e.what());
  }
}
