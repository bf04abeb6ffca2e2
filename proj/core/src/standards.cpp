#include "bsdwear/standards.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bsdwear {

double nominal_life_l10(double dynamic_load_rating_kN, double mean_axial_load_kN) {
  return nominal_life_l10(dynamic_load_rating_kN, mean_axial_load_kN, 1.0);
}

double nominal_life_l10(double dynamic_load_rating_kN, double mean_axial_load_kN,
                        double load_rating_correction) {
  if (!(dynamic_load_rating_kN > 0.0) || !(mean_axial_load_kN > 0.0))
    throw std::invalid_argument("nominal_life_l10: loads must be > 0");
  if (!(load_rating_correction > 0.0))
    throw std::invalid_argument("nominal_life_l10: correction factor must be > 0");
  double ratio = (dynamic_load_rating_kN * load_rating_correction) / mean_axial_load_kN;
  return ratio * ratio * ratio * 1e6;
}

double eol_threshold(const EolPolicy& policy) {
  if (!(policy.alpha > 0.0)) throw std::invalid_argument("eol_threshold: alpha must be > 0");
  if (!(policy.ball_diameter_mm > 0.0))
    throw std::invalid_argument("eol_threshold: ball diameter must be > 0");
  return (policy.ball_diameter_mm * 0.3) * policy.alpha;
}

EolVerdict evaluate_eol(const std::vector<PitTrack>& tracks, int at_drive,
                        const EolPolicy& policy) {
  if (at_drive < 0) throw std::invalid_argument("evaluate_eol: at_drive must be >= 0");
  EolVerdict v;
  v.threshold_mm = eol_threshold(policy);
  for (const auto& track : tracks) {
    for (const auto& obs : track.observations) {
      if (obs.drive_index > at_drive) break;
      double b = obs.tangential_length_mm;
      if (b > v.max_major_axis_mm ||
          (b == v.max_major_axis_mm && v.decisive_track &&
           track.track_id < *v.decisive_track)) {
        v.max_major_axis_mm = b;
        v.decisive_track = track.track_id;
      }
    }
  }
  v.margin = v.max_major_axis_mm / v.threshold_mm;
  v.exceeded = v.max_major_axis_mm >= v.threshold_mm;
  return v;
}

std::optional<int> first_exceedance_drive(const std::vector<PitTrack>& tracks,
                                          const std::vector<DriveMeta>& drives,
                                          const EolPolicy& policy) {
  double threshold = eol_threshold(policy);
  // Running maximum over observations in drive order; equivalent to calling
  // evaluate_eol per drive but one pass.
  double running_max = 0.0;
  std::vector<std::pair<int, double>> per_drive_max;
  for (const auto& track : tracks)
    for (const auto& obs : track.observations)
      per_drive_max.emplace_back(obs.drive_index, obs.tangential_length_mm);
  std::sort(per_drive_max.begin(), per_drive_max.end());

  std::size_t k = 0;
  for (const auto& d : drives) {
    while (k < per_drive_max.size() && per_drive_max[k].first <= d.drive_index) {
      running_max = std::max(running_max, per_drive_max[k].second);
      ++k;
    }
    if (running_max >= threshold) return d.drive_index;
  }
  return std::nullopt;
}

double sum_tangential_expansion(const std::vector<PitTrack>& tracks, int at_drive) {
  double total = 0.0;
  for (const auto& track : tracks) {
    double track_max = 0.0;
    for (const auto& obs : track.observations) {
      if (obs.drive_index > at_drive) break;
      track_max = std::max(track_max, obs.tangential_length_mm);
    }
    total += track_max;
  }
  return total;
}

EolReport make_eol_report(const std::vector<PitTrack>& tracks,
                          const std::vector<DriveMeta>& drives, const EolPolicy& policy,
                          double l10_revolutions,
                          std::optional<double> observed_failure_revolutions) {
  if (drives.empty()) throw std::invalid_argument("make_eol_report: no drives");
  int last_drive = drives.back().drive_index;

  EolReport report;
  report.alpha = policy.alpha;
  EolVerdict verdict = evaluate_eol(tracks, last_drive, policy);
  report.threshold_mm = verdict.threshold_mm;
  report.d_s_mm = verdict.max_major_axis_mm;
  report.exceeded = verdict.exceeded;
  report.decisive_track = verdict.decisive_track;
  report.first_exceedance_drive = first_exceedance_drive(tracks, drives, policy);
  report.l10_revolutions = l10_revolutions;
  if (observed_failure_revolutions && l10_revolutions > 0.0)
    report.observed_over_l10 = *observed_failure_revolutions / l10_revolutions;
  report.sum_tangential_mm = sum_tangential_expansion(tracks, last_drive);
  return report;
}

}  // namespace bsdwear
