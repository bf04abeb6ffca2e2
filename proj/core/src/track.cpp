#include "bsdwear/track.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bsdwear/calib.hpp"

namespace bsdwear {

ValidationResult validate(const TrackingParams& params) {
  ValidationResult r;
  if (!(params.match_radius_mm > 0.0)) r.violations.push_back("match_radius_mm must be > 0");
  return r;
}

std::vector<PitTrack> associate(std::vector<PitTrack> tracks,
                                std::vector<PitObservation> new_obs,
                                const TrackingParams& params, double circumference_mm) {
  if (new_obs.empty()) return tracks;

  const int drive = new_obs.front().drive_index;
  for (const auto& o : new_obs)
    if (o.drive_index != drive)
      throw std::invalid_argument("associate: observations span multiple drives");
  for (const auto& t : tracks)
    if (t.last().drive_index >= drive)
      throw std::invalid_argument("associate: drive index not ahead of existing tracks");

  std::sort(new_obs.begin(), new_obs.end(), [](const auto& a, const auto& b) {
    if (a.centroid.axial_mm != b.centroid.axial_mm)
      return a.centroid.axial_mm < b.centroid.axial_mm;
    return a.centroid.tangential_mm < b.centroid.tangential_mm;
  });

  int next_id = 0;
  for (const auto& t : tracks) next_id = std::max(next_id, t.track_id + 1);

  std::vector<bool> matched(tracks.size(), false);

  for (const auto& obs : new_obs) {
    // Candidate tracks within the match radius, nearest first.
    std::vector<std::pair<double, std::size_t>> candidates;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      if (matched[i] || !tracks[i].active()) continue;
      double d = surface_distance(tracks[i].last().centroid, obs.centroid, circumference_mm);
      if (d <= params.match_radius_mm) candidates.emplace_back(d, i);
    }

    if (candidates.empty()) {
      PitTrack t;
      t.track_id = next_id++;
      t.birth_drive = drive;
      t.observations.push_back(obs);
      tracks.push_back(t);
      matched.push_back(true);
      continue;
    }

    // Oldest candidate survives; any others coalesce into it.
    std::size_t survivor = candidates.front().second;
    for (const auto& [d, i] : candidates) {
      if (tracks[i].birth_drive < tracks[survivor].birth_drive ||
          (tracks[i].birth_drive == tracks[survivor].birth_drive &&
           tracks[i].track_id < tracks[survivor].track_id)) {
        survivor = i;
      }
    }
    for (const auto& [d, i] : candidates) {
      if (i == survivor) continue;
      tracks[i].merged_into = tracks[survivor].track_id;
      tracks[i].merged_at_drive = drive;
      matched[i] = true;
    }
    tracks[survivor].observations.push_back(obs);
    matched[survivor] = true;
  }
  return tracks;
}

PitTrack monotone_envelope(PitTrack track) {
  if (track.observations.empty())
    throw std::invalid_argument("monotone_envelope: track has no observations");
  double a = 0.0, b = 0.0, area = 0.0;
  for (auto& o : track.observations) {
    a = std::max(a, o.axial_length_mm);
    b = std::max(b, o.tangential_length_mm);
    area = std::max(area, o.area_mm2);
    o.axial_length_mm = a;
    o.tangential_length_mm = b;
    o.area_mm2 = area;
  }
  return track;
}

std::vector<PitTrack> apply_envelopes(std::vector<PitTrack> tracks) {
  for (auto& t : tracks) t = monotone_envelope(std::move(t));
  return tracks;
}

double birth_fraction(const PitTrack& track, int failure_drive,
                      const std::vector<DriveMeta>& drives) {
  if (track.birth_drive > failure_drive)
    throw std::invalid_argument("birth_fraction: birth after failure drive");
  const DriveMeta* birth = nullptr;
  const DriveMeta* failure = nullptr;
  for (const auto& d : drives) {
    if (d.drive_index == track.birth_drive) birth = &d;
    if (d.drive_index == failure_drive) failure = &d;
  }
  if (!failure) throw std::invalid_argument("birth_fraction: failure_drive not in drive list");
  if (!birth) throw std::invalid_argument("birth_fraction: birth_drive not in drive list");
  if (!(failure->cumulative_revolutions > 0.0))
    throw std::invalid_argument("birth_fraction: failure revolutions must be > 0");
  return birth->cumulative_revolutions / failure->cumulative_revolutions;
}

}  // namespace bsdwear
