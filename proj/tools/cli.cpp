#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bsdwear/parallel.hpp"
#include "bsdwear/pipeline.hpp"

namespace bsdwear::cli {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string dataset;
  std::string params_file;
  int jobs = 0;
};

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.params_file.empty()) cfg = load_run_config(args.params_file);
  if (args.jobs > 0) cfg.jobs = args.jobs;
  return cfg;
}

std::vector<PitTrack> load_tracks_or_fail(const Dataset& dataset) {
  auto path = dataset.out_dir() / "tracks.json";
  if (!fs::exists(path))
    throw std::runtime_error("missing " + path.string() + " (run `track` first)");
  return read_tracks_json(path, dataset);
}

int do_simulate(const ScenarioConfig& config, const std::string& out_dir, int jobs) {
  GroundTruth truth = generate_scenario(config);
  write_scenario(out_dir, truth, jobs);
  std::cout << "wrote " << truth.pits.size() << " pits over " << config.n_drives
            << " drives to " << out_dir << "\n";
  return 0;
}

int do_measure(const CommonArgs& args) {
  RunConfig cfg = resolve_config(args);
  Dataset dataset = load_dataset(args.dataset);
  auto observations = run_measure(dataset, cfg.segmentation,
                                  cfg.jobs == 0 ? default_jobs() : cfg.jobs);
  fs::create_directories(dataset.out_dir());
  write_observations_csv(dataset.out_dir() / "observations.csv", observations);
  std::cout << observations.size() << " observations -> "
            << (dataset.out_dir() / "observations.csv").string() << "\n";
  return 0;
}

int do_track(const CommonArgs& args) {
  RunConfig cfg = resolve_config(args);
  Dataset dataset = load_dataset(args.dataset);
  auto obs_path = dataset.out_dir() / "observations.csv";
  if (!fs::exists(obs_path))
    throw std::runtime_error("missing " + obs_path.string() + " (run `measure` first)");
  auto observations = read_observations_csv(obs_path, dataset);
  auto tracks = run_track(dataset, observations, cfg.tracking);
  write_tracks_json(dataset.out_dir() / "tracks.json", tracks);
  std::cout << tracks.size() << " tracks -> "
            << (dataset.out_dir() / "tracks.json").string() << "\n";
  return 0;
}

int do_analyze(const CommonArgs& args) {
  Dataset dataset = load_dataset(args.dataset);
  auto tracks = load_tracks_or_fail(dataset);
  AnalysisBundle bundle = run_analyze(dataset, tracks);
  write_analysis_json(dataset.out_dir() / "analysis.json", bundle);
  write_series_csv(dataset.out_dir() / "count.csv", bundle.count);
  write_series_csv(dataset.out_dir() / "total_area.csv", bundle.total_area);
  std::cout << "analysis -> " << (dataset.out_dir() / "analysis.json").string() << "\n";
  return 0;
}

int do_eol(const CommonArgs& args, double alpha, bool correction) {
  Dataset dataset = load_dataset(args.dataset);
  auto tracks = load_tracks_or_fail(dataset);
  EolReport report = run_eol(dataset, tracks, alpha, correction);
  fs::create_directories(dataset.out_dir());
  write_eol_report_json(dataset.out_dir() / "eol_report.json", report);
  std::cout << "d_s " << report.d_s_mm << " mm vs threshold " << report.threshold_mm
            << " mm (alpha " << report.alpha << "): "
            << (report.exceeded ? "EXCEEDED" : "not exceeded") << "\n";
  return report.exceeded ? 3 : 0;
}

int do_report(const CommonArgs& args, double alpha, bool correction) {
  Dataset dataset = load_dataset(args.dataset);
  auto tracks = load_tracks_or_fail(dataset);
  AnalysisBundle bundle = run_analyze(dataset, tracks);
  EolReport report = run_eol(dataset, tracks, alpha, correction);
  write_outputs(dataset, read_observations_csv(dataset.out_dir() / "observations.csv", dataset),
                tracks, bundle, report);
  write_series_csv(dataset.out_dir() / "count.csv", bundle.count);
  write_series_csv(dataset.out_dir() / "total_area.csv", bundle.total_area);
  std::string text = summary_text(dataset, tracks, bundle, report);
  std::ofstream out(dataset.out_dir() / "summary.txt", std::ios::binary | std::ios::trunc);
  out << text;
  std::cout << text;
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"pitting wear quantification for ball screw drive spindles"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic wear dataset");
  ScenarioConfig scenario;
  std::string out_dir;
  int sim_jobs = 0;
  std::vector<double> rates;
  simulate->add_option("--seed", scenario.seed, "scenario random seed");
  simulate->add_option("--drives", scenario.n_drives, "number of camera drives");
  simulate->add_option("--out", out_dir, "output dataset directory")->required();
  simulate->add_option("--failure-drive", scenario.failure_drive,
                       "drive treated as component failure (default: last)");
  simulate->add_option("--frames-per-drive", scenario.frames_per_drive, "frames per drive");
  simulate->add_option("--width", scenario.width_px, "frame width in pixels");
  simulate->add_option("--height", scenario.height_px, "frame height in pixels");
  simulate->add_option("--rates", rates, "per-drive birth rates for the three phases")
      ->expected(3);
  simulate->add_option("--noise-sigma", scenario.noise_sigma, "additive image noise sigma");
  simulate->add_option("--texture-seed", scenario.texture_seed, "background texture seed");
  simulate->add_option("--contrast", scenario.pit_contrast, "pit darkness in gray levels");
  simulate->add_option("--roughness", scenario.boundary_roughness,
                       "relative pit boundary roughness");
  simulate->add_option("--jobs", sim_jobs, "worker threads (0 = all cores)");

  // measure / track / analyze / eol / report
  CommonArgs measure_args, track_args, analyze_args, eol_args, report_args;
  auto add_common = [](CLI::App* cmd, CommonArgs& args, bool with_params, bool with_jobs) {
    cmd->add_option("--dataset", args.dataset, "dataset root directory")->required();
    if (with_params)
      cmd->add_option("--params", args.params_file, "JSON file with pipeline parameters");
    if (with_jobs) cmd->add_option("--jobs", args.jobs, "worker threads (0 = all cores)");
  };

  auto* measure = app.add_subcommand("measure", "segment pits in every frame");
  add_common(measure, measure_args, true, true);

  auto* track = app.add_subcommand("track", "associate observations into pit tracks");
  add_common(track, track_args, true, false);

  auto* analyze = app.add_subcommand("analyze", "emit analysis series and phase fits");
  add_common(analyze, analyze_args, false, false);

  double alpha = 1.0, report_alpha = 1.0;
  bool correction = false, report_correction = false;
  auto* eol = app.add_subcommand("eol", "evaluate the end-of-life criterion");
  add_common(eol, eol_args, false, false);
  eol->add_option("--alpha", alpha, "threshold scaling factor (> 0)");
  eol->add_flag("--correction", correction, "apply the 0.9 load-rating correction to L10");

  auto* report = app.add_subcommand("report", "bundle outputs plus a text summary");
  add_common(report, report_args, false, false);
  report->add_option("--alpha", report_alpha, "threshold scaling factor (> 0)");
  report->add_flag("--correction", report_correction,
                   "apply the 0.9 load-rating correction to L10");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (simulate->parsed()) {
      if (!rates.empty()) scenario.birth_rates = {rates[0], rates[1], rates[2]};
      return do_simulate(scenario, out_dir, sim_jobs);
    }
    if (measure->parsed()) return do_measure(measure_args);
    if (track->parsed()) return do_track(track_args);
    if (analyze->parsed()) return do_analyze(analyze_args);
    if (eol->parsed()) return do_eol(eol_args, alpha, correction);
    if (report->parsed()) return do_report(report_args, report_alpha, report_correction);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace bsdwear::cli
