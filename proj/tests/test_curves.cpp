#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include <stdexcept>

#include "bsdwear/curves.hpp"

using namespace bsdwear;

namespace {

std::int64_t ordered_bits(double d) {
  std::int64_t i;
  std::memcpy(&i, &d, sizeof(i));
  return i < 0 ? std::numeric_limits<std::int64_t>::min() - i : i;
}

std::int64_t ulp_diff(double a, double b) {
  return std::abs(ordered_bits(a) - ordered_bits(b));
}

std::vector<DriveMeta> uniform_drives(int n, double revs_per_drive = 96000.0) {
  std::vector<DriveMeta> drives;
  for (int d = 0; d < n; ++d) {
    DriveMeta m;
    m.drive_index = d;
    m.cumulative_revolutions = d * revs_per_drive;
    m.frame_count = 16;
    drives.push_back(m);
  }
  return drives;
}

PitTrack track_with_areas(int id, int birth_drive, const std::vector<double>& areas) {
  PitTrack t;
  t.track_id = id;
  t.birth_drive = birth_drive;
  int d = birth_drive;
  for (double a : areas) {
    PitObservation o;
    o.drive_index = d++;
    o.area_mm2 = a;
    o.axial_length_mm = 10.0;  // keep the box bound slack
    o.tangential_length_mm = 10.0;
    o.pixel_count = 100;
    t.observations.push_back(o);
  }
  return t;
}

}  // namespace

TEST_CASE("ellipse area formulas") {
  CHECK(ellipse_area(1.0, 2.0) == doctest::Approx(kPi / 2.0).epsilon(1e-12));
  CHECK(ellipse_area(0.0, 5.0) == 0.0);
  CHECK(initial_circle_area(2.0) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(initial_circle_area(0.0) == 0.0);
  CHECK(initial_circle_area(1.0) == doctest::Approx(kPi / 4.0).epsilon(1e-12));
  CHECK(late_stage_area(4.0, 0.5) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(late_stage_area(0.0, 0.5) == 0.0);
  CHECK(late_stage_area(3.0, 0.2) == doctest::Approx(ellipse_area(0.4, 3.0)).epsilon(1e-12));

  CHECK_THROWS_AS(ellipse_area(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(initial_circle_area(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(late_stage_area(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("ellipse identities hold to a few ulp over random inputs") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> len(1e-6, 50.0);
  std::uniform_real_distribution<double> factor(1e-3, 1e3);
  for (int i = 0; i < 2000; ++i) {
    double a = len(rng), b = len(rng), k = factor(rng);
    CHECK(ulp_diff(ellipse_area(b, b), initial_circle_area(b)) <= 4);
    CHECK(ulp_diff(late_stage_area(b, a / 2.0), ellipse_area(a, b)) <= 4);
    CHECK(ulp_diff(ellipse_area(k * a, b), k * ellipse_area(a, b)) <= 4);
    CHECK(ulp_diff(ellipse_area(a, k * b), k * ellipse_area(a, b)) <= 4);
  }
}

TEST_CASE("ball constant is half the axial plateau") {
  PitTrack t = track_with_areas(0, 0, {1, 1, 1, 1, 1, 1});
  std::vector<double> axial{0.1, 0.25, 0.35, 0.395, 0.4, 0.4};
  for (std::size_t i = 0; i < axial.size(); ++i)
    t.observations[i].axial_length_mm = axial[i];

  auto fit = fit_ball_constant(t);
  CHECK(fit.c_mm == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(fit.saturated);

  SUBCASE("constant series") {
    PitTrack c = track_with_areas(1, 0, {1, 1, 1});
    for (auto& o : c.observations) o.axial_length_mm = 0.1;
    auto cfit = fit_ball_constant(c);
    CHECK(cfit.c_mm == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(cfit.saturated);
  }
  SUBCASE("still climbing gets flagged") {
    PitTrack g = track_with_areas(2, 0, {1, 1, 1});
    g.observations[0].axial_length_mm = 0.2;
    g.observations[1].axial_length_mm = 0.4;
    g.observations[2].axial_length_mm = 0.6;
    auto gfit = fit_ball_constant(g);
    CHECK(gfit.c_mm == doctest::Approx(0.3).epsilon(1e-12));
    CHECK_FALSE(gfit.saturated);
  }
  SUBCASE("too few observations") {
    PitTrack s = track_with_areas(3, 0, {1, 2});
    CHECK_THROWS_AS(fit_ball_constant(s), std::invalid_argument);
  }
}

TEST_CASE("lifetime normalization over revolutions") {
  auto drives = uniform_drives(121);
  auto frac = normalize_lifetime(drives, 120);
  CHECK(frac.at(60) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(frac.at(0) == 0.0);
  CHECK(frac.at(120) == 1.0);
  CHECK_THROWS_AS(normalize_lifetime(drives, 500), std::invalid_argument);
}

TEST_CASE("count series counts births at or before each drive") {
  auto drives = uniform_drives(21);
  std::vector<PitTrack> tracks;
  tracks.push_back(track_with_areas(0, 6, {1}));   // born at 0.3
  tracks.push_back(track_with_areas(1, 14, {1}));  // born at 0.7
  tracks.push_back(track_with_areas(2, 17, {1}));  // born at 0.85

  auto series = count_series(tracks, drives, 20);
  REQUIRE(series.points.size() == 21);
  CHECK(series.points[15].normalized_life == doctest::Approx(0.75));
  CHECK(series.points[15].value == 2.0);
  CHECK(series.points[20].value == 3.0);
  for (std::size_t i = 1; i < series.points.size(); ++i)
    CHECK(series.points[i].value >= series.points[i - 1].value);

  SUBCASE("no tracks gives all zeros") {
    auto empty = count_series({}, drives, 20);
    for (const auto& p : empty.points) CHECK(p.value == 0.0);
  }
}

TEST_CASE("total area sums surviving tracks with hold-last imputation") {
  auto drives = uniform_drives(11);
  std::vector<PitTrack> tracks;

  PitTrack a = track_with_areas(0, 2, {1.0});
  {
    PitObservation o;  // gap at drives 3..5, next observation at 6
    o.drive_index = 6;
    o.area_mm2 = 1.5;
    o.axial_length_mm = o.tangential_length_mm = 10.0;
    a.observations.push_back(o);
  }
  PitTrack b = track_with_areas(1, 4, {2.5});
  tracks = {a, b};

  auto series = total_area_series(tracks, drives, 10);
  CHECK(series.points[4].value == doctest::Approx(1.0 + 2.5));  // sum at drive 4
  CHECK(series.points[5].value == doctest::Approx(3.5));        // a holds 1.0 through the gap
  CHECK(series.points[6].value == doctest::Approx(1.5 + 2.5));

  SUBCASE("merged tracks drop out at the merge drive") {
    tracks[1].merged_into = 0;
    tracks[1].merged_at_drive = 6;
    auto merged = total_area_series(tracks, drives, 10);
    CHECK(merged.points[5].value == doctest::Approx(3.5));
    CHECK(merged.points[6].value == doctest::Approx(1.5));
    CHECK(merged.points[10].value == doctest::Approx(1.5));
  }
}

TEST_CASE("per-pit series project single quantities") {
  auto drives = uniform_drives(11);
  PitTrack t = track_with_areas(7, 2, {1.0, 2.0, 3.0});
  t.observations[0].tangential_length_mm = 0.5;
  t.observations[1].tangential_length_mm = 0.7;
  t.observations[2].tangential_length_mm = 0.9;

  auto area = per_pit_series(t, PitQuantity::Area, drives, 10);
  REQUIRE(area.points.size() == 3);
  CHECK(area.points[1].value == 2.0);

  auto tang = per_pit_series(t, PitQuantity::Tangential, drives, 10);
  CHECK(tang.points[0].value == 0.5);
  CHECK(tang.points[2].value == 0.9);

  CHECK_THROWS_AS(pit_quantity_from_string("volume"), std::invalid_argument);
  CHECK(pit_quantity_from_string("axial") == PitQuantity::Axial);
}

TEST_CASE("three-phase fit recovers a noiseless piecewise line exactly") {
  AnalysisSeries s;
  std::vector<double> ts;
  for (int i = 0; i <= 40; ++i) {
    double t = i / 40.0;
    ts.push_back(t);
    double y = 0.2 + 0.1 * t + 0.9 * std::max(0.0, t - 0.6) + 4.0 * std::max(0.0, t - 0.8);
    s.points.push_back({t, y});
  }
  auto fit = fit_three_phase(s);
  CHECK(fit.t1 == ts[24]);  // 0.6 on the observed grid
  CHECK(fit.t2 == ts[32]);  // 0.8
  CHECK(fit.segment_slopes[0] == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(fit.segment_slopes[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.segment_slopes[2] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(fit.intercept == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(fit.sse <= fit.single_line_sse);
  CHECK(fit.sse == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(fit.distinct_phases);
}

TEST_CASE("a pure line yields near-equal slopes and gets flagged") {
  AnalysisSeries s;
  for (int i = 0; i <= 20; ++i) {
    double t = i / 20.0;
    s.points.push_back({t, 1.0 + 2.0 * t});
  }
  auto fit = fit_three_phase(s);
  CHECK(fit.sse == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK_FALSE(fit.distinct_phases);
  CHECK(fit.slope_spread() < 0.10);
}

TEST_CASE("fit is invariant under value-axis scaling up to slope scaling") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.02);
  AnalysisSeries s, scaled;
  for (int i = 0; i <= 40; ++i) {
    double t = i / 40.0;
    double y = 0.1 * t + 0.9 * std::max(0.0, t - 0.55) + 4.0 * std::max(0.0, t - 0.85) +
               noise(rng);
    s.points.push_back({t, y});
    scaled.points.push_back({t, 100.0 * y - 7.0});
  }
  auto f1 = fit_three_phase(s);
  auto f2 = fit_three_phase(scaled);
  CHECK(f1.t1 == f2.t1);
  CHECK(f1.t2 == f2.t2);
  for (int k = 0; k < 3; ++k)
    CHECK(f2.segment_slopes[k] == doctest::Approx(100.0 * f1.segment_slopes[k]).epsilon(1e-6));
}

TEST_CASE("fit rejects short or out-of-domain series") {
  AnalysisSeries s;
  for (int i = 0; i < 7; ++i) s.points.push_back({i / 10.0, 1.0});
  CHECK_THROWS_AS(fit_three_phase(s), std::invalid_argument);
  AnalysisSeries wide;
  for (int i = 0; i <= 10; ++i) wide.points.push_back({i / 5.0, 1.0});
  CHECK_THROWS_AS(fit_three_phase(wide), std::invalid_argument);
}

TEST_CASE("approximation error series") {
  auto drives = uniform_drives(11);
  PitTrack t = track_with_areas(0, 1, {0.2});
  t.observations[0].axial_length_mm = 0.2;
  t.observations[0].tangential_length_mm = 1.0;  // rectangle: area = a * b

  auto series = approximation_error_series(t, drives, 10);
  REQUIRE(series.points.size() == 1);
  CHECK(series.points[0].value == doctest::Approx(std::abs(1.0 - kPi / 4.0)).epsilon(1e-9));

  SUBCASE("zero empirical area stays finite") {
    PitTrack z = track_with_areas(1, 1, {0.0});
    z.observations[0].axial_length_mm = 0.0;
    z.observations[0].tangential_length_mm = 0.0;
    z.observations[0].pixel_count = 0;
    auto zs = approximation_error_series(z, drives, 10);
    CHECK(std::isfinite(zs.points[0].value));
    CHECK(zs.points[0].value == 0.0);
  }
  SUBCASE("relative errors are scale invariant") {
    PitTrack big = t;
    big.observations[0].axial_length_mm *= 3.0;
    big.observations[0].tangential_length_mm *= 3.0;
    big.observations[0].area_mm2 *= 9.0;
    auto bs = approximation_error_series(big, drives, 10);
    CHECK(bs.points[0].value == doctest::Approx(series.points[0].value).epsilon(1e-12));
  }
}

TEST_CASE("lifetime statistics with interpolated quantiles") {
  std::map<std::string, double> l10{{"s1", 2.0}, {"s2", 2.0}, {"s3", 2.0}};
  std::vector<std::pair<std::string, double>> observed{
      {"s1", 1.0}, {"s2", 2.4}, {"s3", 6.0}};  // ratios 0.5, 1.2, 3.0

  auto stats = lifetime_stats(observed, l10);
  CHECK(stats.median == doctest::Approx(1.2));
  CHECK(stats.min == doctest::Approx(0.5));
  CHECK(stats.max == doctest::Approx(3.0));
  CHECK(stats.q1 == doctest::Approx(0.85));
  CHECK(stats.q3 == doctest::Approx(2.1));

  SUBCASE("ratios above ten are representable") {
    std::map<std::string, double> one{{"s", 1.0}};
    auto s = lifetime_stats({{"s", 12.5}}, one);
    CHECK(s.max == doctest::Approx(12.5));
  }
  SUBCASE("unknown spindle id is an error") {
    CHECK_THROWS_AS(lifetime_stats({{"nope", 1.0}}, l10), std::invalid_argument);
  }
}
