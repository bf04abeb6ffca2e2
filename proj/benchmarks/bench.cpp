#include <benchmark/benchmark.h>

#include <random>

#include "bsdwear/curves.hpp"
#include "bsdwear/segment.hpp"
#include "bsdwear/synth.hpp"
#include "bsdwear/track.hpp"

namespace {

using namespace bsdwear;

ScenarioConfig bench_config() {
  ScenarioConfig cfg;
  cfg.seed = 5;
  cfg.n_drives = 40;
  cfg.frames_per_drive = 24;
  cfg.width_px = 1296;
  cfg.height_px = 972;
  return cfg;
}

void BM_RenderFrame(benchmark::State& state) {
  GroundTruth truth = generate_scenario(bench_config());
  SceneRenderer renderer(truth);
  int drive = truth.config.n_drives - 1;
  int frame = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(renderer.render_frame(drive, frame));
    frame = (frame + 1) % truth.config.frames_per_drive;
  }
}
BENCHMARK(BM_RenderFrame)->Unit(benchmark::kMillisecond);

void BM_SegmentFrame(benchmark::State& state) {
  GroundTruth truth = generate_scenario(bench_config());
  SceneRenderer renderer(truth);
  SegmentationParams params;
  std::vector<std::pair<int, cv::Mat>> drive0;
  for (int f = 0; f < truth.config.frames_per_drive; ++f)
    drive0.emplace_back(f, renderer.render_frame(0, f));
  ReferenceMap reference = build_reference(drive0, params);

  int drive = truth.config.n_drives - 1;
  cv::Mat frame = renderer.render_frame(drive, 0);
  FrameRef ref = renderer.frame_ref(drive, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        segment_frame(frame, ref, reference, params, truth.calibration, truth.config.spindle));
  }
}
BENCHMARK(BM_SegmentFrame)->Unit(benchmark::kMillisecond);

void BM_FitThreePhase(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  AnalysisSeries series;
  series.name = "bench";
  std::mt19937 rng(7);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (std::size_t i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(n - 1);
    double y = 0.1 * t + (t > 0.6 ? 0.9 * (t - 0.6) : 0.0) + (t > 0.8 ? 4.0 * (t - 0.8) : 0.0);
    series.points.push_back({t, y + noise(rng)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_three_phase(series));
}
BENCHMARK(BM_FitThreePhase)->Arg(40)->Arg(120)->Unit(benchmark::kMillisecond);

void BM_Associate(benchmark::State& state) {
  const int n_tracks = static_cast<int>(state.range(0));
  SpindleSpec spec = rexroth_32x20();
  TrackingParams params;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ax(0.0, 40.0), tan(0.0, spec.circumference_mm());

  std::vector<PitTrack> tracks;
  std::vector<PitObservation> next;
  for (int i = 0; i < n_tracks; ++i) {
    PitObservation o;
    o.drive_index = 0;
    o.centroid = {ax(rng), tan(rng)};
    PitTrack t;
    t.track_id = i;
    t.birth_drive = 0;
    t.observations.push_back(o);
    tracks.push_back(t);
    o.drive_index = 1;
    next.push_back(o);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(associate(tracks, next, params, spec.circumference_mm()));
  }
}
BENCHMARK(BM_Associate)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
