#pragma once

#include <map>
#include <opencv2/core.hpp>
#include <span>

#include "bsdwear/calib.hpp"
#include "bsdwear/types.hpp"

namespace bsdwear {

/// Parameters of the reference-difference segmentation pipeline.
struct SegmentationParams {
  int blur_radius_px = 2;
  /// Fixed intensity threshold on |current - reference|, or nullopt for
  /// automatic selection (Otsu on the difference histogram).
  std::optional<int> diff_threshold;
  /// Lower clamp on the automatic threshold. Otsu always splits a histogram,
  /// even a pure-noise one; differences at or below this level are treated as
  /// background. Ignored for fixed thresholds; 0 restores plain Otsu.
  int min_auto_threshold = 8;
  int min_region_px = 25;
  int closing_radius_px = 2;
  int connectivity = 8;
};

ValidationResult validate(const SegmentationParams& params);

/// Converts 8-bit color input to grayscale by the standard luma weighting;
/// grayscale input passes through.
cv::Mat to_grayscale(const cv::Mat& image);

/// Otsu's threshold over an 8-bit single-channel image histogram.
int otsu_threshold(const cv::Mat& gray);

/// Per-frame-position references captured at drive 0, stored smoothed.
class ReferenceMap {
 public:
  const cv::Mat* find(int frame_index) const;
  std::size_t size() const { return refs_.size(); }

 private:
  friend ReferenceMap build_reference(const std::vector<std::pair<int, cv::Mat>>&,
                                      const SegmentationParams&);
  std::map<int, cv::Mat> refs_;
};

/// Builds the reference map from the drive-0 frames (keyed by frame_index).
/// All frames must share one size; duplicate indices are rejected.
ReferenceMap build_reference(const std::vector<std::pair<int, cv::Mat>>& drive0_frames,
                             const SegmentationParams& params);

/// Measures one connected pixel region: axis-aligned extents, pixel-count
/// area, and the surface-mapped centroid. cv::Point is (x = col, y = row).
PitObservation measure_region(std::span<const cv::Point> region_pixels, const FrameRef& frame,
                              const Calibration& cal, const SpindleSpec& spec);

/// Detects pitting regions in one frame against its reference. The pipeline
/// is blur, absolute difference, threshold (fixed or Otsu), morphological
/// closing, connected components, minimum-size filter, region measurement.
/// Deterministic; results ordered by (centroid axial, centroid tangential).
std::vector<PitObservation> segment_frame(const cv::Mat& frame_image, const FrameRef& frame,
                                          const ReferenceMap& ref,
                                          const SegmentationParams& params,
                                          const Calibration& cal, const SpindleSpec& spec);

}  // namespace bsdwear
