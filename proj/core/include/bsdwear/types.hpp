#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bsdwear {

inline constexpr double kPi = 3.14159265358979323846;

/// Physical identity of one ball-screw spindle.
struct SpindleSpec {
  std::string id;
  double diameter_mm = 0.0;
  double lead_mm = 0.0;
  double ball_diameter_mm = 0.0;        ///< rolling-element diameter D_w
  double dynamic_load_rating_kN = 0.0;  ///< dynamic axial load rating C_a
  std::string pretension_class;

  double circumference_mm() const { return kPi * diameter_mm; }
};

/// The Bosch Rexroth BASA 32x20Rx3.969 spindle used on the reference test bench.
SpindleSpec rexroth_32x20();

/// Constant operating point of a wear test.
struct LoadSpec {
  double mean_axial_load_kN = 0.0;  ///< mean effective axial load F_m
  double speed_rpm = 0.0;
};

/// Metadata of one camera drive (one traversal of the camera along the spindle).
struct DriveMeta {
  int drive_index = 0;
  std::string wall_time;  ///< ISO 8601 UTC, informational
  double cumulative_revolutions = 0.0;
  std::optional<double> flange_temperature_C;  ///< metadata only, never a failure criterion
  int frame_count = 0;
};

/// Identifies one image within a drive. Frames are taken every angular step
/// (default 22.5 deg), so frame_index also encodes the spindle rotation.
struct FrameRef {
  int drive_index = 0;
  int frame_index = 0;
  double rotation_step_deg = 0.0;
  int width_px = 0;
  int height_px = 0;
};

/// Position on the unwrapped spindle surface. Tangential runs along the
/// raceway (circumference), axial along the spindle axis.
struct SurfaceCoord {
  double axial_mm = 0.0;
  double tangential_mm = 0.0;
};

/// One pit measured in one camera drive.
struct PitObservation {
  int drive_index = 0;
  FrameRef frame;
  SurfaceCoord centroid;
  double axial_length_mm = 0.0;      ///< a
  double tangential_length_mm = 0.0; ///< b
  double area_mm2 = 0.0;             ///< empirical (pixel-count) area
  std::int64_t pixel_count = 0;
};

/// One pit's identity and its full observation history.
struct PitTrack {
  int track_id = 0;
  std::vector<PitObservation> observations;
  int birth_drive = 0;
  std::optional<int> merged_into;      ///< id of the surviving track, if coalesced
  std::optional<int> merged_at_drive;  ///< drive at which the coalescence happened

  bool active() const { return !merged_into.has_value(); }
  const PitObservation& last() const { return observations.back(); }
};

struct SeriesPoint {
  double normalized_life = 0.0;
  double value = 0.0;
};

/// A named quantity over normalized lifetime (1.0 = worn spindle).
struct AnalysisSeries {
  std::string name;
  std::string unit;
  std::vector<SeriesPoint> points;
};

/// The alpha-scaled end-of-life rule d_s >= D_w * 0.3 * alpha.
struct EolPolicy {
  double alpha = 1.0;
  double ball_diameter_mm = 0.0;
};

/// Outcome of an invariant check. Violations are data, not failures.
struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationResult validate_spec(const SpindleSpec& spec);
ValidationResult validate(const LoadSpec& load);
ValidationResult validate(const FrameRef& frame, double angular_step_deg);
ValidationResult validate(const PitObservation& obs);
ValidationResult validate(const PitTrack& track);
ValidationResult validate(const AnalysisSeries& series);
ValidationResult validate(const EolPolicy& policy);

/// Checks ordering invariants across a drive sequence: strictly increasing
/// drive_index, non-decreasing cumulative_revolutions.
ValidationResult validate_drives(const std::vector<DriveMeta>& drives);

}  // namespace bsdwear
