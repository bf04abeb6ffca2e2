#pragma once

#include "bsdwear/types.hpp"

namespace bsdwear {

struct TrackingParams {
  double match_radius_mm = 1.0;
  bool enable_monotone_envelope = true;
};

ValidationResult validate(const TrackingParams& params);

/// Associates one drive's observations with the existing tracks by greedy
/// nearest-centroid matching (tangential distance taken modulo the spindle
/// circumference). Observations are processed in ascending centroid order.
/// Unmatched observations open new tracks. When several active tracks fall
/// within the match radius of one observation, the oldest (earliest birth,
/// then smallest id) survives and takes the observation; the others record
/// merged_into and stop. All observations must share one drive index that is
/// strictly greater than every track's last drive.
std::vector<PitTrack> associate(std::vector<PitTrack> tracks,
                                std::vector<PitObservation> new_obs,
                                const TrackingParams& params, double circumference_mm);

/// Replaces each of the a, b, area series by its running maximum; pits never
/// shrink, so dips are detection artifacts. Centroids are untouched.
PitTrack monotone_envelope(PitTrack track);

std::vector<PitTrack> apply_envelopes(std::vector<PitTrack> tracks);

/// Fraction of life at which the pit first became visible:
/// revolutions(birth_drive) / revolutions(failure_drive).
double birth_fraction(const PitTrack& track, int failure_drive,
                      const std::vector<DriveMeta>& drives);

}  // namespace bsdwear
