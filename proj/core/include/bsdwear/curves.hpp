#pragma once

#include <array>
#include <map>
#include <string_view>

#include "bsdwear/types.hpp"

namespace bsdwear {

/// Elliptic pit area A = (1/2 a)(1/2 b) pi, a axial, b tangential.
double ellipse_area(double axial_mm, double tangential_mm);

/// Area of a freshly formed (circular) pit, A = 1/4 b^2 pi.
double initial_circle_area(double tangential_mm);

/// Late-stage area A = 1/2 b c pi with the ball-dependent constant c.
/// Equals ellipse_area(a, b) when c = a/2.
double late_stage_area(double tangential_mm, double ball_constant_mm);

struct BallConstantFit {
  double c_mm = 0.0;
  bool saturated = true;  ///< false when the axial series is still climbing
};

/// Estimates the ball-dependent constant as half the axial saturation plateau
/// (c = a_sat / 2). Requires at least 3 observations. The fit is flagged as
/// not saturated when the last two axial increments exceed 5 % of the maximum.
BallConstantFit fit_ball_constant(const PitTrack& track);

/// Maps each drive index to its fraction of life, defined over cumulative
/// revolutions: fraction(d) = revolutions(d) / revolutions(failure_drive).
std::map<int, double> normalize_lifetime(const std::vector<DriveMeta>& drives,
                                         int failure_drive);

/// Number of pits (counted by physical origin, merged tracks included) born
/// at or before each drive.
AnalysisSeries count_series(const std::vector<PitTrack>& tracks,
                            const std::vector<DriveMeta>& drives, int failure_drive);

/// Sum of the latest known area over surviving (non-merged) tracks per drive.
/// Detection gaps hold the last observed value.
AnalysisSeries total_area_series(const std::vector<PitTrack>& tracks,
                                 const std::vector<DriveMeta>& drives, int failure_drive);

enum class PitQuantity { Area, Axial, Tangential };

PitQuantity pit_quantity_from_string(std::string_view name);
const char* to_string(PitQuantity q);

/// One point per observation of the chosen quantity over normalized lifetime.
AnalysisSeries per_pit_series(const PitTrack& track, PitQuantity quantity,
                              const std::vector<DriveMeta>& drives, int failure_drive);

/// Relative error of the elliptic approximation against the empirical
/// (pixel-count) area, per observation.
AnalysisSeries approximation_error_series(const PitTrack& track,
                                          const std::vector<DriveMeta>& drives,
                                          int failure_drive);

/// Continuous three-segment piecewise-linear fit with two breakpoints.
struct PhaseFit {
  double t1 = 0.0;
  double t2 = 0.0;
  std::array<double, 3> segment_slopes{};
  double intercept = 0.0;
  double sse = 0.0;
  double single_line_sse = 0.0;
  bool distinct_phases = true;  ///< false when the slope spread is below 10 %

  double slope_spread() const;
};

/// Exhaustive grid search over breakpoint pairs taken from the observed time
/// grid (t2 - t1 >= 0.05, at least 2 points per segment), least squares over
/// 4 free parameters (intercept + 3 slopes) per candidate. Requires >= 8
/// points on a domain within [0, 1].
PhaseFit fit_three_phase(const AnalysisSeries& series);

/// Everything `analyze` produces for one dataset.
struct AnalysisBundle {
  AnalysisSeries count;
  AnalysisSeries total_area;
  std::optional<PhaseFit> count_fit;       ///< absent when too few drives
  std::optional<PhaseFit> total_area_fit;
  struct PerTrack {
    int track_id = 0;
    AnalysisSeries area;
    AnalysisSeries axial;
    AnalysisSeries tangential;
    AnalysisSeries approx_error;
    std::optional<BallConstantFit> ball_constant;  ///< absent below 3 observations
  };
  std::vector<PerTrack> per_track;
};

/// Builds the full analysis bundle from finalized (enveloped) tracks.
AnalysisBundle analyze_tracks(const std::vector<PitTrack>& tracks,
                              const std::vector<DriveMeta>& drives, int failure_drive);

struct LifetimeStats {
  std::vector<std::pair<std::string, double>> ratios;  ///< failure / L10 per spindle
  double min = 0.0;
  double q1 = 0.0;      ///< linear-interpolation quantiles between order statistics
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Ratios of observed failure revolutions to nominal L10 plus their spread.
LifetimeStats lifetime_stats(
    const std::vector<std::pair<std::string, double>>& observed_failures,
    const std::map<std::string, double>& l10_revolutions);

}  // namespace bsdwear
