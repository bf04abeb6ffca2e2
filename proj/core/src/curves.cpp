#include "bsdwear/curves.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bsdwear {

double ellipse_area(double axial_mm, double tangential_mm) {
  if (axial_mm < 0.0 || tangential_mm < 0.0)
    throw std::invalid_argument("ellipse_area: lengths must be >= 0");
  return (0.5 * axial_mm) * (0.5 * tangential_mm) * kPi;
}

double initial_circle_area(double tangential_mm) {
  if (tangential_mm < 0.0)
    throw std::invalid_argument("initial_circle_area: length must be >= 0");
  return ellipse_area(tangential_mm, tangential_mm);
}

double late_stage_area(double tangential_mm, double ball_constant_mm) {
  if (tangential_mm < 0.0)
    throw std::invalid_argument("late_stage_area: length must be >= 0");
  if (!(ball_constant_mm > 0.0))
    throw std::invalid_argument("late_stage_area: ball constant must be > 0");
  return (0.5 * tangential_mm) * ball_constant_mm * kPi;
}

BallConstantFit fit_ball_constant(const PitTrack& track) {
  const auto& obs = track.observations;
  if (obs.size() < 3)
    throw std::invalid_argument("fit_ball_constant: need at least 3 observations");
  double a_max = 0.0;
  for (const auto& o : obs) a_max = std::max(a_max, o.axial_length_mm);

  BallConstantFit fit;
  fit.c_mm = 0.5 * a_max;
  double tol = 0.05 * a_max;
  auto n = obs.size();
  double inc_last = obs[n - 1].axial_length_mm - obs[n - 2].axial_length_mm;
  double inc_prev = obs[n - 2].axial_length_mm - obs[n - 3].axial_length_mm;
  fit.saturated = !(inc_last > tol && inc_prev > tol);
  return fit;
}

std::map<int, double> normalize_lifetime(const std::vector<DriveMeta>& drives,
                                         int failure_drive) {
  const DriveMeta* failure = nullptr;
  for (const auto& d : drives)
    if (d.drive_index == failure_drive) failure = &d;
  if (!failure)
    throw std::invalid_argument("normalize_lifetime: failure_drive not in drive list");
  if (!(failure->cumulative_revolutions > 0.0))
    throw std::invalid_argument("normalize_lifetime: failure revolutions must be > 0");

  std::map<int, double> fractions;
  for (const auto& d : drives)
    fractions[d.drive_index] = d.cumulative_revolutions / failure->cumulative_revolutions;
  return fractions;
}

AnalysisSeries count_series(const std::vector<PitTrack>& tracks,
                            const std::vector<DriveMeta>& drives, int failure_drive) {
  auto frac = normalize_lifetime(drives, failure_drive);
  AnalysisSeries s;
  s.name = "count";
  s.unit = "pits";
  s.points.reserve(drives.size());
  for (const auto& d : drives) {
    double count = 0.0;
    for (const auto& t : tracks)
      if (t.birth_drive <= d.drive_index) count += 1.0;
    s.points.push_back({frac.at(d.drive_index), count});
  }
  return s;
}

AnalysisSeries total_area_series(const std::vector<PitTrack>& tracks,
                                 const std::vector<DriveMeta>& drives, int failure_drive) {
  auto frac = normalize_lifetime(drives, failure_drive);
  AnalysisSeries s;
  s.name = "total_area";
  s.unit = "mm^2";
  s.points.reserve(drives.size());
  for (const auto& d : drives) {
    double total = 0.0;
    for (const auto& t : tracks) {
      if (t.merged_at_drive && *t.merged_at_drive <= d.drive_index) continue;
      double held = 0.0;
      for (const auto& o : t.observations) {
        if (o.drive_index > d.drive_index) break;
        held = o.area_mm2;  // hold-last across detection gaps
      }
      total += held;
    }
    s.points.push_back({frac.at(d.drive_index), total});
  }
  return s;
}

PitQuantity pit_quantity_from_string(std::string_view name) {
  if (name == "area") return PitQuantity::Area;
  if (name == "axial") return PitQuantity::Axial;
  if (name == "tangential") return PitQuantity::Tangential;
  throw std::invalid_argument("unknown pit quantity '" + std::string(name) +
                              "' (expected area|axial|tangential)");
}

const char* to_string(PitQuantity q) {
  switch (q) {
    case PitQuantity::Area: return "area";
    case PitQuantity::Axial: return "axial";
    default: return "tangential";
  }
}

AnalysisSeries per_pit_series(const PitTrack& track, PitQuantity quantity,
                              const std::vector<DriveMeta>& drives, int failure_drive) {
  if (track.observations.empty())
    throw std::invalid_argument("per_pit_series: track has no observations");
  auto frac = normalize_lifetime(drives, failure_drive);
  AnalysisSeries s;
  s.name = std::string("track_") + std::to_string(track.track_id) + "_" + to_string(quantity);
  s.unit = quantity == PitQuantity::Area ? "mm^2" : "mm";
  s.points.reserve(track.observations.size());
  for (const auto& o : track.observations) {
    double v = 0.0;
    switch (quantity) {
      case PitQuantity::Area: v = o.area_mm2; break;
      case PitQuantity::Axial: v = o.axial_length_mm; break;
      case PitQuantity::Tangential: v = o.tangential_length_mm; break;
    }
    s.points.push_back({frac.at(o.drive_index), v});
  }
  return s;
}

AnalysisSeries approximation_error_series(const PitTrack& track,
                                          const std::vector<DriveMeta>& drives,
                                          int failure_drive) {
  if (track.observations.empty())
    throw std::invalid_argument("approximation_error_series: track has no observations");
  constexpr double kEpsArea = 1e-9;  // mm^2, guards empty empirical areas
  auto frac = normalize_lifetime(drives, failure_drive);
  AnalysisSeries s;
  s.name = std::string("track_") + std::to_string(track.track_id) + "_approx_error";
  s.unit = "relative";
  s.points.reserve(track.observations.size());
  for (const auto& o : track.observations) {
    double approx = ellipse_area(o.axial_length_mm, o.tangential_length_mm);
    double err = std::abs(o.area_mm2 - approx) / std::max(o.area_mm2, kEpsArea);
    s.points.push_back({frac.at(o.drive_index), err});
  }
  return s;
}

double PhaseFit::slope_spread() const {
  double lo = *std::min_element(segment_slopes.begin(), segment_slopes.end());
  double hi = *std::max_element(segment_slopes.begin(), segment_slopes.end());
  double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
  return (hi - lo) / scale;
}

namespace {

// Least squares of y over columns [1, t, (t-t1)+, (t-t2)+]; returns SSE and
// the coefficient vector.
double hinge_lsq(const std::vector<double>& t, const std::vector<double>& y, double t1,
                 double t2, Eigen::Vector4d* beta) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double ti = t[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    x(i, 1) = ti;
    x(i, 2) = std::max(0.0, ti - t1);
    x(i, 3) = std::max(0.0, ti - t2);
    v(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::Vector4d b = x.colPivHouseholderQr().solve(v);
  if (beta) *beta = b;
  return (x * b - v).squaredNorm();
}

double line_lsq(const std::vector<double>& t, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = t[static_cast<std::size_t>(i)];
    v(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::Vector2d b = x.colPivHouseholderQr().solve(v);
  return (x * b - v).squaredNorm();
}

}  // namespace

PhaseFit fit_three_phase(const AnalysisSeries& series) {
  const auto& pts = series.points;
  const std::size_t n = pts.size();
  if (n < 8) throw std::invalid_argument("fit_three_phase: need at least 8 points");

  std::vector<double> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = pts[i].normalized_life;
    y[i] = pts[i].value;
    if (t[i] < 0.0 || t[i] > 1.0)
      throw std::invalid_argument("fit_three_phase: domain must lie within [0, 1]");
    if (i > 0 && t[i] <= t[i - 1])
      throw std::invalid_argument("fit_three_phase: times must be strictly increasing");
  }

  constexpr double kMinGap = 0.05;
  double best_sse = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0, best_j = 0;
  Eigen::Vector4d best_beta = Eigen::Vector4d::Zero();

  // Breakpoints at observed times; segments [t0,t1], (t1,t2], (t2,tn] each
  // need >= 2 points, and the breakpoints stay strictly inside (0, 1).
  for (std::size_t i = 1; i + 4 < n; ++i) {
    if (!(t[i] > 0.0)) continue;
    for (std::size_t j = i + 2; j + 2 < n; ++j) {
      if (!(t[j] < 1.0)) break;
      if (t[j] - t[i] < kMinGap) continue;
      Eigen::Vector4d beta;
      double sse = hinge_lsq(t, y, t[i], t[j], &beta);
      if (sse < best_sse) {
        best_sse = sse;
        best_i = i;
        best_j = j;
        best_beta = beta;
      }
    }
  }
  if (!std::isfinite(best_sse))
    throw std::invalid_argument("fit_three_phase: no admissible breakpoint pair");

  PhaseFit fit;
  fit.t1 = t[best_i];
  fit.t2 = t[best_j];
  fit.intercept = best_beta(0);
  fit.segment_slopes[0] = best_beta(1);
  fit.segment_slopes[1] = best_beta(1) + best_beta(2);
  fit.segment_slopes[2] = best_beta(1) + best_beta(2) + best_beta(3);
  fit.sse = best_sse;
  fit.single_line_sse = line_lsq(t, y);
  // The single line is nested in every candidate model; clamp away solver roundoff.
  fit.sse = std::min(fit.sse, fit.single_line_sse);
  fit.distinct_phases = fit.slope_spread() >= 0.10;
  return fit;
}

AnalysisBundle analyze_tracks(const std::vector<PitTrack>& tracks,
                              const std::vector<DriveMeta>& drives, int failure_drive) {
  AnalysisBundle bundle;
  bundle.count = count_series(tracks, drives, failure_drive);
  bundle.total_area = total_area_series(tracks, drives, failure_drive);
  if (bundle.count.points.size() >= 8) {
    bundle.count_fit = fit_three_phase(bundle.count);
    bundle.total_area_fit = fit_three_phase(bundle.total_area);
  }
  for (const auto& t : tracks) {
    AnalysisBundle::PerTrack per;
    per.track_id = t.track_id;
    per.area = per_pit_series(t, PitQuantity::Area, drives, failure_drive);
    per.axial = per_pit_series(t, PitQuantity::Axial, drives, failure_drive);
    per.tangential = per_pit_series(t, PitQuantity::Tangential, drives, failure_drive);
    per.approx_error = approximation_error_series(t, drives, failure_drive);
    if (t.observations.size() >= 3) per.ball_constant = fit_ball_constant(t);
    bundle.per_track.push_back(std::move(per));
  }
  return bundle;
}

namespace {

double interp_quantile(std::vector<double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double h = (static_cast<double>(n) - 1.0) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, n - 1);
  double w = h - static_cast<double>(lo);
  return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

}  // namespace

LifetimeStats lifetime_stats(
    const std::vector<std::pair<std::string, double>>& observed_failures,
    const std::map<std::string, double>& l10_revolutions) {
  if (observed_failures.empty() || l10_revolutions.empty())
    throw std::invalid_argument("lifetime_stats: inputs must be non-empty");

  LifetimeStats stats;
  std::vector<double> ratios;
  for (const auto& [id, failure_revs] : observed_failures) {
    auto it = l10_revolutions.find(id);
    if (it == l10_revolutions.end())
      throw std::invalid_argument("lifetime_stats: no L10 entry for spindle '" + id + "'");
    if (!(it->second > 0.0))
      throw std::invalid_argument("lifetime_stats: L10 must be > 0 for spindle '" + id + "'");
    double ratio = failure_revs / it->second;
    stats.ratios.emplace_back(id, ratio);
    ratios.push_back(ratio);
  }
  std::sort(ratios.begin(), ratios.end());
  stats.min = ratios.front();
  stats.max = ratios.back();
  stats.q1 = interp_quantile(ratios, 0.25);
  stats.median = interp_quantile(ratios, 0.50);
  stats.q3 = interp_quantile(ratios, 0.75);
  return stats;
}

}  // namespace bsdwear
