#include "bsdwear/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <map>
#include <opencv2/imgcodecs.hpp>
#include <sstream>
#include <stdexcept>

#include "bsdwear/parallel.hpp"
#include "bsdwear/standards.hpp"

namespace bsdwear {

using nlohmann::json;

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open params file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed JSON in " + path.string() + ": " + e.what());
  }

  RunConfig cfg;
  if (auto it = j.find("segmentation"); it != j.end()) {
    const json& s = *it;
    if (s.contains("blur_radius_px")) cfg.segmentation.blur_radius_px = s["blur_radius_px"];
    if (s.contains("diff_threshold") && !s["diff_threshold"].is_null())
      cfg.segmentation.diff_threshold = s["diff_threshold"].get<int>();
    if (s.contains("min_auto_threshold"))
      cfg.segmentation.min_auto_threshold = s["min_auto_threshold"];
    if (s.contains("min_region_px")) cfg.segmentation.min_region_px = s["min_region_px"];
    if (s.contains("closing_radius_px"))
      cfg.segmentation.closing_radius_px = s["closing_radius_px"];
    if (s.contains("connectivity")) cfg.segmentation.connectivity = s["connectivity"];
  }
  if (auto it = j.find("tracking"); it != j.end()) {
    const json& t = *it;
    if (t.contains("match_radius_mm")) cfg.tracking.match_radius_mm = t["match_radius_mm"];
    if (t.contains("enable_monotone_envelope"))
      cfg.tracking.enable_monotone_envelope = t["enable_monotone_envelope"];
  }
  if (auto it = j.find("eol"); it != j.end()) {
    const json& e = *it;
    if (e.contains("alpha")) cfg.alpha = e["alpha"];
    if (e.contains("load_rating_correction"))
      cfg.load_rating_correction = e["load_rating_correction"];
  }
  if (j.contains("jobs")) cfg.jobs = j["jobs"];

  auto seg_check = validate(cfg.segmentation);
  if (!seg_check.ok())
    throw std::runtime_error("invalid segmentation params: " + seg_check.violations.front());
  auto trk_check = validate(cfg.tracking);
  if (!trk_check.ok())
    throw std::runtime_error("invalid tracking params: " + trk_check.violations.front());
  return cfg;
}

void write_scenario(const std::filesystem::path& root, const GroundTruth& truth, int jobs) {
  const auto& cfg = truth.config;
  SceneRenderer renderer(truth);

  Dataset skeleton;
  skeleton.root = root;
  skeleton.spindle = cfg.spindle;
  skeleton.load = cfg.load;
  skeleton.calibration = truth.calibration;
  skeleton.failed = true;
  skeleton.failure_drive = cfg.resolved_failure_drive();
  skeleton.width_px = cfg.width_px;
  skeleton.height_px = cfg.height_px;
  for (int d = 0; d < cfg.n_drives; ++d) skeleton.drives.push_back(renderer.drive_meta(d));

  save_dataset_metadata(skeleton);
  write_ground_truth_json(root / "ground_truth.json", truth);

  const std::vector<int> png_params{cv::IMWRITE_PNG_COMPRESSION, 1};
  const auto total = static_cast<std::size_t>(cfg.n_drives) *
                     static_cast<std::size_t>(cfg.frames_per_drive);
  parallel_for(total, jobs == 0 ? default_jobs() : jobs, [&](std::size_t i) {
    int d = static_cast<int>(i) / cfg.frames_per_drive;
    int f = static_cast<int>(i) % cfg.frames_per_drive;
    cv::Mat frame = renderer.render_frame(d, f);
    auto path = skeleton.frame_path(d, f);
    if (!cv::imwrite(path.string(), frame, png_params))
      throw std::runtime_error("cannot write frame " + path.string());
  });
}

std::vector<PitObservation> run_measure(const Dataset& dataset,
                                        const SegmentationParams& params, int jobs) {
  auto param_check = validate(params);
  if (!param_check.ok())
    throw std::runtime_error("invalid segmentation params: " + param_check.violations.front());

  const DriveMeta* drive0 = dataset.find_drive(0);
  if (!drive0)
    throw std::runtime_error("dataset has no drive 0 to build the reference from");

  std::vector<std::pair<int, cv::Mat>> reference_frames;
  for (int f = 0; f < drive0->frame_count; ++f)
    reference_frames.emplace_back(f, dataset.load_frame(0, f));
  ReferenceMap reference = build_reference(reference_frames, params);
  reference_frames.clear();

  struct Job {
    int drive_index;
    int frame_index;
  };
  std::vector<Job> work;
  for (const auto& meta : dataset.drives)
    for (int f = 0; f < meta.frame_count; ++f) work.push_back({meta.drive_index, f});

  std::vector<std::vector<PitObservation>> per_frame(work.size());
  parallel_for(work.size(), jobs == 0 ? default_jobs() : jobs, [&](std::size_t i) {
    const Job& job = work[i];
    cv::Mat image = dataset.load_frame(job.drive_index, job.frame_index);
    FrameRef ref = dataset.frame_ref(job.drive_index, job.frame_index);
    per_frame[i] =
        segment_frame(image, ref, reference, params, dataset.calibration, dataset.spindle);
  });

  std::vector<PitObservation> observations;
  for (auto& chunk : per_frame)
    observations.insert(observations.end(), chunk.begin(), chunk.end());
  return observations;
}

std::vector<PitTrack> run_track(const Dataset& dataset,
                                const std::vector<PitObservation>& observations,
                                const TrackingParams& params) {
  auto param_check = validate(params);
  if (!param_check.ok())
    throw std::runtime_error("invalid tracking params: " + param_check.violations.front());

  std::map<int, std::vector<PitObservation>> by_drive;
  for (const auto& o : observations) by_drive[o.drive_index].push_back(o);

  std::vector<PitTrack> tracks;
  double circumference = dataset.spindle.circumference_mm();
  for (auto& [drive, obs] : by_drive)
    tracks = associate(std::move(tracks), std::move(obs), params, circumference);

  if (params.enable_monotone_envelope) tracks = apply_envelopes(std::move(tracks));
  return tracks;
}

AnalysisBundle run_analyze(const Dataset& dataset, const std::vector<PitTrack>& tracks) {
  int failure = dataset.failed ? dataset.failure_drive : dataset.drives.back().drive_index;
  return analyze_tracks(tracks, dataset.drives, failure);
}

EolReport run_eol(const Dataset& dataset, const std::vector<PitTrack>& tracks, double alpha,
                  bool load_rating_correction) {
  EolPolicy policy{alpha, dataset.spindle.ball_diameter_mm};
  double correction = load_rating_correction ? 0.9 : 1.0;
  double l10 = nominal_life_l10(dataset.spindle.dynamic_load_rating_kN,
                                dataset.load.mean_axial_load_kN, correction);
  std::optional<double> observed;
  if (dataset.failed)
    if (const DriveMeta* failure = dataset.find_drive(dataset.failure_drive))
      observed = failure->cumulative_revolutions;
  return make_eol_report(tracks, dataset.drives, policy, l10, observed);
}

std::string summary_text(const Dataset& dataset, const std::vector<PitTrack>& tracks,
                         const AnalysisBundle& bundle, const EolReport& report) {
  std::size_t surviving = 0;
  for (const auto& t : tracks)
    if (t.active()) ++surviving;

  std::ostringstream os;
  os << "spindle " << dataset.spindle.id << ", " << dataset.drives.size() << " drives, "
     << (dataset.failed ? "failed" : "running") << "\n";
  os << "pits by origin: " << tracks.size() << " (" << surviving
     << " surviving after coalescence)\n";
  if (!bundle.total_area.points.empty())
    os << "total pitting area at end: " << bundle.total_area.points.back().value << " mm^2\n";
  if (bundle.count_fit) {
    const auto& f = *bundle.count_fit;
    os << "count phases: breaks at " << f.t1 << " / " << f.t2 << ", slopes "
       << f.segment_slopes[0] << " / " << f.segment_slopes[1] << " / " << f.segment_slopes[2];
    if (!f.distinct_phases) os << " (no distinct phases)";
    os << "\n";
  }
  os << "L10: " << report.l10_revolutions << " revolutions";
  if (report.observed_over_l10)
    os << ", observed failure at " << *report.observed_over_l10 << " x L10";
  os << "\n";
  os << "EOL (alpha " << report.alpha << "): d_s " << report.d_s_mm << " mm vs threshold "
     << report.threshold_mm << " mm -> " << (report.exceeded ? "EXCEEDED" : "not exceeded");
  if (report.first_exceedance_drive)
    os << ", first exceeded at drive " << *report.first_exceedance_drive;
  os << "\n";
  os << "sum of largest tangential expansions: " << report.sum_tangential_mm << " mm\n";
  return os.str();
}

}  // namespace bsdwear
