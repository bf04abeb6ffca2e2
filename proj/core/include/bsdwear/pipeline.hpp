#pragma once

#include <filesystem>

#include "bsdwear/segment.hpp"
#include "bsdwear/store.hpp"
#include "bsdwear/track.hpp"

namespace bsdwear {

/// Everything a pipeline run can be configured with; mirrors the --params
/// JSON file of the command-line tool.
struct RunConfig {
  SegmentationParams segmentation;
  TrackingParams tracking;
  double alpha = 1.0;
  bool load_rating_correction = false;  ///< apply the 0.9 catalogue factor to C_a
  int jobs = 0;                         ///< 0 = hardware concurrency
};

RunConfig load_run_config(const std::filesystem::path& path);

/// Renders a scenario and writes the full dataset (metadata, frames,
/// ground_truth.json) under root.
void write_scenario(const std::filesystem::path& root, const GroundTruth& truth, int jobs);

/// Builds the drive-0 reference and segments every frame of every drive.
/// Frames may be processed concurrently (jobs threads); the result is ordered
/// by (drive, frame, centroid).
std::vector<PitObservation> run_measure(const Dataset& dataset,
                                        const SegmentationParams& params, int jobs);

/// Associates per-drive observations into tracks and applies the monotone
/// envelope when enabled.
std::vector<PitTrack> run_track(const Dataset& dataset,
                                const std::vector<PitObservation>& observations,
                                const TrackingParams& params);

AnalysisBundle run_analyze(const Dataset& dataset, const std::vector<PitTrack>& tracks);

EolReport run_eol(const Dataset& dataset, const std::vector<PitTrack>& tracks, double alpha,
                  bool load_rating_correction);

/// Human-readable digest used by the `report` subcommand.
std::string summary_text(const Dataset& dataset, const std::vector<PitTrack>& tracks,
                         const AnalysisBundle& bundle, const EolReport& report);

}  // namespace bsdwear
