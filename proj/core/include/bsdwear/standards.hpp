#pragma once

#include "bsdwear/types.hpp"

namespace bsdwear {

/// Nominal life L10 = (C_a / F_m)^3 * 10^6 revolutions.
double nominal_life_l10(double dynamic_load_rating_kN, double mean_axial_load_kN);

/// Same with an optional load-rating correction factor applied to C_a before
/// cubing (e.g. the 0.9 catalogue factor); off unless requested by the caller.
double nominal_life_l10(double dynamic_load_rating_kN, double mean_axial_load_kN,
                        double load_rating_correction);

/// End-of-life pit size threshold D_w * 0.3 * alpha.
double eol_threshold(const EolPolicy& policy);

struct EolVerdict {
  bool exceeded = false;
  std::optional<int> decisive_track;
  double max_major_axis_mm = 0.0;  ///< d_s, largest (enveloped) tangential length
  double threshold_mm = 0.0;
  double margin = 0.0;  ///< max_major_axis / threshold
};

/// Evaluates the criterion over everything observed up to and including
/// at_drive. No tracks means d_s = 0 and a clean verdict.
EolVerdict evaluate_eol(const std::vector<PitTrack>& tracks, int at_drive,
                        const EolPolicy& policy);

/// Earliest drive whose verdict is exceeded, or nullopt if none is.
std::optional<int> first_exceedance_drive(const std::vector<PitTrack>& tracks,
                                          const std::vector<DriveMeta>& drives,
                                          const EolPolicy& policy);

/// Report-only auxiliary: sum of the largest tangential expansion per track
/// up to at_drive (the criterion itself uses only the single largest pit).
double sum_tangential_expansion(const std::vector<PitTrack>& tracks, int at_drive);

/// Payload of eol_report.json.
struct EolReport {
  double threshold_mm = 0.0;
  double alpha = 1.0;
  double d_s_mm = 0.0;
  bool exceeded = false;
  std::optional<int> decisive_track;
  std::optional<int> first_exceedance_drive;
  double l10_revolutions = 0.0;
  std::optional<double> observed_over_l10;  ///< absent when the test never failed
  double sum_tangential_mm = 0.0;
};

/// Renders the verdict over a drive sequence. observed_failure_revolutions is
/// the revolution count at the failure drive, when the dataset is flagged
/// failed.
EolReport make_eol_report(const std::vector<PitTrack>& tracks,
                          const std::vector<DriveMeta>& drives, const EolPolicy& policy,
                          double l10_revolutions,
                          std::optional<double> observed_failure_revolutions);

}  // namespace bsdwear
