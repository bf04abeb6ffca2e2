#include "bsdwear/types.hpp"

#include <cmath>
#include <sstream>

namespace bsdwear {

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

SpindleSpec rexroth_32x20() {
  SpindleSpec s;
  s.id = "BASA-32x20Rx3.969";
  s.diameter_mm = 32.0;
  s.lead_mm = 20.0;
  s.ball_diameter_mm = 3.969;
  s.dynamic_load_rating_kN = 23.6;
  s.pretension_class = "C3";
  return s;
}

ValidationResult validate_spec(const SpindleSpec& spec) {
  ValidationResult r;
  bool diameter_ok = finite_positive(spec.diameter_mm);
  bool ball_ok = finite_positive(spec.ball_diameter_mm);
  if (!diameter_ok) r.violations.push_back("diameter_mm must be > 0");
  if (!finite_positive(spec.lead_mm)) r.violations.push_back("lead_mm must be > 0");
  if (!ball_ok) r.violations.push_back("ball_diameter_mm must be > 0");
  if (!finite_positive(spec.dynamic_load_rating_kN))
    r.violations.push_back("dynamic_load_rating_kN must be > 0");
  // ordering only judged once both lengths are individually valid
  if (diameter_ok && ball_ok && spec.ball_diameter_mm >= spec.diameter_mm)
    r.violations.push_back("ball_diameter_mm must be < diameter_mm");
  return r;
}

ValidationResult validate(const LoadSpec& load) {
  ValidationResult r;
  if (!finite_positive(load.mean_axial_load_kN))
    r.violations.push_back("mean_axial_load_kN must be > 0");
  if (!finite_positive(load.speed_rpm)) r.violations.push_back("speed_rpm must be > 0");
  return r;
}

ValidationResult validate(const FrameRef& frame, double angular_step_deg) {
  ValidationResult r;
  if (frame.width_px <= 0 || frame.height_px <= 0)
    r.violations.push_back("frame dimensions must be positive");
  if (frame.frame_index < 0) r.violations.push_back("frame_index must be >= 0");
  double expected = std::fmod(frame.frame_index * angular_step_deg, 360.0);
  if (std::abs(frame.rotation_step_deg - expected) > 1e-9)
    r.violations.push_back("rotation_step_deg must equal frame_index * angular_step mod 360");
  return r;
}

ValidationResult validate(const PitObservation& obs) {
  ValidationResult r;
  if (!(obs.axial_length_mm >= 0.0)) r.violations.push_back("axial_length_mm must be >= 0");
  if (!(obs.tangential_length_mm >= 0.0))
    r.violations.push_back("tangential_length_mm must be >= 0");
  if (!(obs.area_mm2 >= 0.0)) r.violations.push_back("area_mm2 must be >= 0");
  if (obs.pixel_count > 0) {
    // Bounding-box bound; small slack covers the single-pixel equality case.
    double bound = obs.axial_length_mm * obs.tangential_length_mm;
    if (obs.area_mm2 > bound * (1.0 + 1e-12) + 1e-18)
      r.violations.push_back("area_mm2 must not exceed axial_length_mm * tangential_length_mm");
  }
  return r;
}

ValidationResult validate(const PitTrack& track) {
  ValidationResult r;
  if (track.observations.empty()) {
    r.violations.push_back("track must have at least one observation");
    return r;
  }
  for (std::size_t i = 1; i < track.observations.size(); ++i) {
    if (track.observations[i].drive_index <= track.observations[i - 1].drive_index) {
      r.violations.push_back("observation drive indices must be strictly increasing");
      break;
    }
  }
  if (track.birth_drive != track.observations.front().drive_index)
    r.violations.push_back("birth_drive must equal the first observation's drive_index");
  return r;
}

ValidationResult validate(const AnalysisSeries& series) {
  ValidationResult r;
  for (std::size_t i = 0; i < series.points.size(); ++i) {
    if (!std::isfinite(series.points[i].value)) {
      r.violations.push_back("series values must be finite");
      break;
    }
  }
  for (std::size_t i = 1; i < series.points.size(); ++i) {
    if (series.points[i].normalized_life <= series.points[i - 1].normalized_life) {
      r.violations.push_back("normalized_life must be strictly increasing");
      break;
    }
  }
  return r;
}

ValidationResult validate(const EolPolicy& policy) {
  ValidationResult r;
  if (!finite_positive(policy.alpha)) r.violations.push_back("alpha must be > 0");
  if (!finite_positive(policy.ball_diameter_mm))
    r.violations.push_back("ball_diameter_mm must be > 0");
  return r;
}

ValidationResult validate_drives(const std::vector<DriveMeta>& drives) {
  ValidationResult r;
  for (std::size_t i = 1; i < drives.size(); ++i) {
    if (drives[i].drive_index <= drives[i - 1].drive_index) {
      std::ostringstream os;
      os << "drive_index not strictly increasing at position " << i;
      r.violations.push_back(os.str());
      break;
    }
  }
  for (std::size_t i = 1; i < drives.size(); ++i) {
    if (drives[i].cumulative_revolutions < drives[i - 1].cumulative_revolutions) {
      std::ostringstream os;
      os << "cumulative_revolutions decreases at drive " << drives[i].drive_index;
      r.violations.push_back(os.str());
      break;
    }
  }
  return r;
}

}  // namespace bsdwear
