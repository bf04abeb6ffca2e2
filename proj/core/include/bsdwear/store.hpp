#pragma once

#include <filesystem>
#include <opencv2/core.hpp>

#include "bsdwear/calib.hpp"
#include "bsdwear/curves.hpp"
#include "bsdwear/standards.hpp"
#include "bsdwear/synth.hpp"
#include "bsdwear/types.hpp"

namespace bsdwear {

/// On-disk layout:
///   root/spindle.json
///   root/drives/drive_%06d/meta.json + frame_%03d.png
///   root/ground_truth.json            (simulated datasets only)
///   root/out/                         (pipeline outputs)
struct Dataset {
  std::filesystem::path root;
  SpindleSpec spindle;
  LoadSpec load;
  Calibration calibration;
  std::vector<DriveMeta> drives;
  bool failed = false;
  int failure_drive = -1;
  int width_px = 0;
  int height_px = 0;

  std::filesystem::path drive_dir(int drive_index) const;
  std::filesystem::path frame_path(int drive_index, int frame_index) const;
  std::filesystem::path out_dir() const { return root / "out"; }
  FrameRef frame_ref(int drive_index, int frame_index) const;
  const DriveMeta* find_drive(int drive_index) const;
  /// Loads one frame as grayscale (color input reduced by luma weighting)
  /// and validates its dimensions against the drive metadata.
  cv::Mat load_frame(int drive_index, int frame_index) const;
};

/// Parses and validates a dataset. Frame files are checked for existence up
/// front and decoded lazily via Dataset::load_frame.
Dataset load_dataset(const std::filesystem::path& root);

/// Writes spindle.json and the per-drive metadata for a dataset skeleton.
void save_dataset_metadata(const Dataset& dataset);

void write_observations_csv(const std::filesystem::path& path,
                            const std::vector<PitObservation>& observations);
std::vector<PitObservation> read_observations_csv(const std::filesystem::path& path,
                                                  const Dataset& dataset);

void write_tracks_json(const std::filesystem::path& path, const std::vector<PitTrack>& tracks);
std::vector<PitTrack> read_tracks_json(const std::filesystem::path& path,
                                       const Dataset& dataset);

void write_analysis_json(const std::filesystem::path& path, const AnalysisBundle& bundle);
void write_series_csv(const std::filesystem::path& path, const AnalysisSeries& series);

void write_eol_report_json(const std::filesystem::path& path, const EolReport& report);

void write_ground_truth_json(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth read_ground_truth_json(const std::filesystem::path& path);

struct OutputPaths {
  std::filesystem::path observations_csv;
  std::filesystem::path tracks_json;
  std::filesystem::path analysis_json;
  std::filesystem::path eol_report_json;
};

/// Writes all pipeline outputs under <root>/out/. Deterministic: identical
/// inputs produce byte-identical files (stable ordering, shortest round-trip
/// number formatting).
OutputPaths write_outputs(const Dataset& dataset,
                          const std::vector<PitObservation>& observations,
                          const std::vector<PitTrack>& tracks, const AnalysisBundle& bundle,
                          const EolReport& report);

}  // namespace bsdwear
