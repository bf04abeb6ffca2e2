#pragma once

#include "bsdwear/types.hpp"

namespace bsdwear {

/// Which image axis runs along the spindle axis.
enum class ImageAxis { Rows, Columns };

const char* to_string(ImageAxis axis);
ImageAxis image_axis_from_string(const std::string& s);

/// Pixel-to-physical conversion and frame geometry. One isotropic scale; the
/// frame advances by one angular step between consecutive frames of a drive.
struct Calibration {
  double mm_per_px = 0.0;
  ImageAxis axial_axis = ImageAxis::Columns;
  double angular_step_deg = 22.5;

  int frames_per_revolution() const;
};

ValidationResult validate(const Calibration& cal);

/// mm^2 covered by one pixel.
double area_scale(const Calibration& cal);

/// Axial advance of the frame origin per frame step: lead * step/360.
double axial_step_mm(const Calibration& cal, const SpindleSpec& spec);

/// Tangential advance of the frame origin per frame step: pi*d * step/360.
double tangential_step_mm(const Calibration& cal, const SpindleSpec& spec);

/// Sub-pixel position inside a frame (row/col may be fractional, e.g. centroids).
struct PixelCoord {
  double row = 0.0;
  double col = 0.0;
};

/// Reduces a tangential coordinate into [0, circumference).
double wrap_tangential(double tangential_mm, double circumference_mm);

/// Shortest tangential distance on the circle.
double tangential_distance(double t1_mm, double t2_mm, double circumference_mm);

/// Euclidean surface distance with the tangential component wrapped.
double surface_distance(const SurfaceCoord& p, const SurfaceCoord& q, double circumference_mm);

/// Maps a pixel of a given frame to the unwrapped surface. Throws
/// std::out_of_range if the pixel lies outside the frame bounds.
SurfaceCoord frame_to_surface(const Calibration& cal, const SpindleSpec& spec,
                              const FrameRef& frame, PixelCoord pixel);

/// Inverse of frame_to_surface for one frame; nullopt when the surface point
/// is not imaged by this frame.
std::optional<PixelCoord> surface_to_frame(const Calibration& cal, const SpindleSpec& spec,
                                           const FrameRef& frame, const SurfaceCoord& coord);

}  // namespace bsdwear
