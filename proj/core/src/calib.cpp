#include "bsdwear/calib.hpp"

#include <cmath>
#include <stdexcept>

namespace bsdwear {

const char* to_string(ImageAxis axis) {
  return axis == ImageAxis::Rows ? "rows" : "columns";
}

ImageAxis image_axis_from_string(const std::string& s) {
  if (s == "rows") return ImageAxis::Rows;
  if (s == "columns") return ImageAxis::Columns;
  throw std::invalid_argument("unknown image axis '" + s + "' (expected rows|columns)");
}

int Calibration::frames_per_revolution() const {
  return static_cast<int>(std::lround(360.0 / angular_step_deg));
}

ValidationResult validate(const Calibration& cal) {
  ValidationResult r;
  if (!(std::isfinite(cal.mm_per_px) && cal.mm_per_px > 0.0))
    r.violations.push_back("mm_per_px must be > 0");
  if (!(cal.angular_step_deg > 0.0)) {
    r.violations.push_back("angular_step_deg must be > 0");
  } else {
    double n = 360.0 / cal.angular_step_deg;
    if (std::abs(n - std::round(n)) > 1e-9)
      r.violations.push_back("angular_step_deg must divide 360 evenly");
  }
  return r;
}

double area_scale(const Calibration& cal) { return cal.mm_per_px * cal.mm_per_px; }

double axial_step_mm(const Calibration& cal, const SpindleSpec& spec) {
  return spec.lead_mm * cal.angular_step_deg / 360.0;
}

double tangential_step_mm(const Calibration& cal, const SpindleSpec& spec) {
  return spec.circumference_mm() * cal.angular_step_deg / 360.0;
}

double wrap_tangential(double tangential_mm, double circumference_mm) {
  double t = std::fmod(tangential_mm, circumference_mm);
  if (t < 0.0) t += circumference_mm;
  return t;
}

double tangential_distance(double t1_mm, double t2_mm, double circumference_mm) {
  double d = std::abs(wrap_tangential(t1_mm, circumference_mm) -
                      wrap_tangential(t2_mm, circumference_mm));
  return std::min(d, circumference_mm - d);
}

double surface_distance(const SurfaceCoord& p, const SurfaceCoord& q, double circumference_mm) {
  double da = p.axial_mm - q.axial_mm;
  double dt = tangential_distance(p.tangential_mm, q.tangential_mm, circumference_mm);
  return std::hypot(da, dt);
}

namespace {

// Splits a pixel coordinate into (axial offset, tangential offset) in pixels.
std::pair<double, double> split_axes(const Calibration& cal, PixelCoord pixel) {
  if (cal.axial_axis == ImageAxis::Columns) return {pixel.col, pixel.row};
  return {pixel.row, pixel.col};
}

std::pair<int, int> axis_extents(const Calibration& cal, const FrameRef& frame) {
  // (axial extent, tangential extent) in pixels.
  if (cal.axial_axis == ImageAxis::Columns) return {frame.width_px, frame.height_px};
  return {frame.height_px, frame.width_px};
}

}  // namespace

SurfaceCoord frame_to_surface(const Calibration& cal, const SpindleSpec& spec,
                              const FrameRef& frame, PixelCoord pixel) {
  if (pixel.row < 0.0 || pixel.row >= frame.height_px || pixel.col < 0.0 ||
      pixel.col >= frame.width_px) {
    throw std::out_of_range("pixel outside frame bounds");
  }
  auto [ax_px, tan_px] = split_axes(cal, pixel);
  SurfaceCoord c;
  c.axial_mm = ax_px * cal.mm_per_px + frame.frame_index * axial_step_mm(cal, spec);
  double tan = tan_px * cal.mm_per_px + frame.frame_index * tangential_step_mm(cal, spec);
  c.tangential_mm = wrap_tangential(tan, spec.circumference_mm());
  return c;
}

std::optional<PixelCoord> surface_to_frame(const Calibration& cal, const SpindleSpec& spec,
                                           const FrameRef& frame, const SurfaceCoord& coord) {
  auto [ax_extent, tan_extent] = axis_extents(cal, frame);
  double ax_px =
      (coord.axial_mm - frame.frame_index * axial_step_mm(cal, spec)) / cal.mm_per_px;
  if (ax_px < 0.0 || ax_px >= ax_extent) return std::nullopt;

  double circumference = spec.circumference_mm();
  double origin =
      wrap_tangential(frame.frame_index * tangential_step_mm(cal, spec), circumference);
  double delta = wrap_tangential(coord.tangential_mm - origin, circumference);
  double tan_px = delta / cal.mm_per_px;
  if (tan_px < 0.0 || tan_px >= tan_extent) return std::nullopt;

  PixelCoord p;
  if (cal.axial_axis == ImageAxis::Columns) {
    p.col = ax_px;
    p.row = tan_px;
  } else {
    p.row = ax_px;
    p.col = tan_px;
  }
  return p;
}

}  // namespace bsdwear
