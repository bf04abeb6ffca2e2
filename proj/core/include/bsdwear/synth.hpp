#pragma once

#include <array>
#include <cstdint>
#include <opencv2/core.hpp>

#include "bsdwear/calib.hpp"
#include "bsdwear/types.hpp"

namespace bsdwear {

/// Growth law of one synthetic pit over normalized lifetime t >= t0.
///
/// Axial:      a(t) = a_sat * (1 - exp(-k * tau)) + eps_lin * tau,
///             tau = (t - t0) + birth_offset
/// Tangential: b(t) = b0 + g * (t - t0) + h * (t - t0)^2
///
/// b0 is the axial value at birth, so a(t0) = b(t0) = b0 > 0: new pits are
/// small circles. The axial curve saturates near a_sat (plus a slow linear
/// tail), the tangential curve keeps accelerating.
struct PitTrajectory {
  double t0 = 0.0;
  double birth_offset = 0.033;
  double axial_saturation_mm = 0.33;  ///< a_sat
  double axial_rate = 16.0;           ///< k
  double axial_linear_mm = 0.02;      ///< eps_lin
  double tangential_base_mm = 2.73;   ///< g
  double tangential_accel = 1.586;    ///< h, mm per unit life squared

  double birth_size_mm() const;
  double axial_at(double t) const;
  double tangential_at(double t) const;
  /// (a, b) at normalized time t; throws for t < t0.
  std::pair<double, double> size_at(double t) const;
};

/// Full description of a synthetic wear scenario.
struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::uint64_t texture_seed = 99;
  int n_drives = 40;
  int failure_drive = -1;  ///< -1 resolves to the last drive
  int frames_per_drive = 24;
  int width_px = 2592;
  int height_px = 1944;

  /// Per-drive birth intensities on the normalized intervals
  /// [0.2, 0.6), [0.6, 0.8), [0.8, 1.0]; nothing before 20 %. The defaults
  /// keep the expected births per phase increasing despite the long first
  /// interval.
  std::array<double, 3> birth_rates{0.26, 0.65, 1.45};

  double axial_saturation_mm = 0.33;
  double axial_rate = 16.0;
  double axial_linear_mm = 0.02;
  double tangential_base_mm = 2.73;
  double tangential_accel = 1.586;
  double birth_offset = 0.033;
  double param_jitter = 0.05;  ///< relative spread of per-pit growth constants

  double min_separation_mm = 3.0;
  double noise_sigma = 2.0;
  double pit_contrast = 120.0;
  double boundary_roughness = 0.0;

  double drive_period_hours = 4.0;
  SpindleSpec spindle = rexroth_32x20();
  LoadSpec load{9.44, 400.0};

  int resolved_failure_drive() const { return failure_drive < 0 ? n_drives - 1 : failure_drive; }
  double revolutions_per_drive() const { return drive_period_hours * 60.0 * load.speed_rpm; }
  /// Tangential frame extent must tile one angular step exactly.
  Calibration derive_calibration() const;
};

struct GroundTruthPit {
  int id = 0;
  double t0 = 0.0;          ///< continuous birth time, normalized life
  int birth_drive = 0;      ///< first drive at or after t0
  SurfaceCoord centroid;
  PitTrajectory trajectory;
};

struct GroundTruthState {
  int pit_id = 0;
  double axial_mm = 0.0;
  double tangential_mm = 0.0;
  double area_mm2 = 0.0;  ///< exact elliptic area
};

struct GroundTruth {
  ScenarioConfig config;
  Calibration calibration;
  std::vector<GroundTruthPit> pits;
  /// Exact (a, b, area) of every live pit, one entry per drive.
  std::vector<std::vector<GroundTruthState>> drive_states;

  double drive_fraction(int drive_index) const;
};

/// Recomputes the per-drive exact states from birth times and trajectories.
std::vector<std::vector<GroundTruthState>> compute_drive_states(
    const ScenarioConfig& config, const std::vector<GroundTruthPit>& pits);

/// Samples pit births from a piecewise-constant-intensity counting process,
/// places centroids uniformly on the imaged raceway strip (pairwise centroid
/// separation >= min_separation_mm and non-overlapping final extents), and
/// attaches growth trajectories. Deterministic for a given seed. Throws when
/// placement cannot satisfy the separation constraints.
GroundTruth generate_scenario(const ScenarioConfig& config);

/// One drive's rendered frames plus metadata.
struct RenderedDrive {
  std::vector<cv::Mat> frames;
  DriveMeta meta;
  std::vector<std::string> warnings;  ///< pits not imaged by any frame
};

/// Renders frames of a scenario: deterministic background texture per frame
/// position, each live pit drawn as a filled dark ellipse, additive Gaussian
/// noise. Textures are cached per frame position, so rendering individual
/// frames is cheap and thread-safe after construction.
class SceneRenderer {
 public:
  explicit SceneRenderer(const GroundTruth& truth);
  SceneRenderer(const GroundTruth& truth, const Calibration& cal, const SpindleSpec& spec);

  cv::Mat render_frame(int drive_index, int frame_index) const;
  RenderedDrive render_drive(int drive_index) const;
  DriveMeta drive_meta(int drive_index) const;
  FrameRef frame_ref(int drive_index, int frame_index) const;
  const cv::Mat& texture(int frame_index) const;

 private:
  const GroundTruth& truth_;
  Calibration cal_;
  SpindleSpec spec_;
  std::vector<cv::Mat> textures_;
};

/// Convenience wrapper over SceneRenderer for one-off drives.
RenderedDrive render_drive(const GroundTruth& truth, int drive_index, const Calibration& cal,
                           const SpindleSpec& spec);

/// Fraction of the pixel at (row, col) covered by the (optionally roughened)
/// ellipse, estimated on a 4x4 subsample grid.
double ellipse_coverage(double row, double col, double center_row, double center_col,
                        double semi_row_px, double semi_col_px, double roughness = 0.0,
                        std::uint64_t roughness_phase = 0);

/// Number of pixels a pit covers in a frame (coverage >= 0.5); the pixel
/// count oracle for rasterization checks.
std::int64_t count_rendered_pixels(const GroundTruth& truth, int pit_id, int drive_index);

/// Ideal noise-free tracks straight from the ground truth, one per pit.
std::vector<PitTrack> ground_truth_tracks(const GroundTruth& truth);

}  // namespace bsdwear
