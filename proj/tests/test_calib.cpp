#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <tuple>
#include <stdexcept>

#include "bsdwear/calib.hpp"

using namespace bsdwear;

namespace {

Calibration test_cal(double mm_per_px = 0.01) {
  Calibration cal;
  cal.mm_per_px = mm_per_px;
  cal.axial_axis = ImageAxis::Columns;
  cal.angular_step_deg = 22.5;
  return cal;
}

FrameRef frame_at(int index, int width = 640, int height = 480) {
  FrameRef f;
  f.drive_index = 0;
  f.frame_index = index;
  f.rotation_step_deg = std::fmod(index * 22.5, 360.0);
  f.width_px = width;
  f.height_px = height;
  return f;
}

}  // namespace

TEST_CASE("area scale is the square of the pixel pitch") {
  CHECK(area_scale(test_cal(0.01)) == doctest::Approx(1.0e-4).epsilon(1e-12));
  CHECK(area_scale(test_cal(1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(area_scale(test_cal(0.02)) == doctest::Approx(4.0e-4).epsilon(1e-12));
}

TEST_CASE("per-frame advances for the reference spindle") {
  SpindleSpec spec = rexroth_32x20();
  Calibration cal = test_cal();
  CHECK(axial_step_mm(cal, spec) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(tangential_step_mm(cal, spec) == doctest::Approx(2.0 * kPi).epsilon(1e-12));
  CHECK(cal.frames_per_revolution() == 16);
}

TEST_CASE("origin pixel of frame zero maps to the surface origin") {
  SpindleSpec spec = rexroth_32x20();
  auto c = frame_to_surface(test_cal(), spec, frame_at(0), PixelCoord{0.0, 0.0});
  CHECK(c.axial_mm == 0.0);
  CHECK(c.tangential_mm == 0.0);
}

TEST_CASE("out-of-bounds pixels are rejected") {
  SpindleSpec spec = rexroth_32x20();
  CHECK_THROWS_AS(frame_to_surface(test_cal(), spec, frame_at(0), PixelCoord{480.0, 0.0}),
                  std::out_of_range);
  CHECK_THROWS_AS(frame_to_surface(test_cal(), spec, frame_at(0), PixelCoord{0.0, -1.0}),
                  std::out_of_range);
}

TEST_CASE("calibration validation") {
  CHECK(validate(test_cal()).ok());
  Calibration bad = test_cal();
  bad.mm_per_px = 0.0;
  CHECK_FALSE(validate(bad).ok());
  bad = test_cal();
  bad.angular_step_deg = 23.0;  // does not divide 360
  CHECK_FALSE(validate(bad).ok());
}

TEST_CASE("frame mapping is injective within one drive") {
  SpindleSpec spec = rexroth_32x20();
  // Exact tiling: the tangential frame extent equals one angular step.
  const int width = 200, height = 160;
  Calibration cal = test_cal(spec.circumference_mm() / (16.0 * height));

  std::mt19937 rng(42);
  std::uniform_int_distribution<int> frame_dist(0, 23);  // beyond one revolution
  std::uniform_int_distribution<int> row_dist(0, height - 1);
  std::uniform_int_distribution<int> col_dist(0, width - 1);

  std::set<std::tuple<int, int, int>> sampled;
  std::set<std::pair<long long, long long>> seen;
  for (int i = 0; i < 4000; ++i) {
    int k = frame_dist(rng);
    int row = row_dist(rng), col = col_dist(rng);
    if (!sampled.insert(std::make_tuple(k, row, col)).second) continue;  // same pixel drawn twice
    auto c = frame_to_surface(cal, spec, frame_at(k, width, height),
                              PixelCoord{static_cast<double>(row), static_cast<double>(col)});
    auto key = std::make_pair(std::llround(c.axial_mm * 1e7),
                              std::llround(c.tangential_mm * 1e7));
    CHECK(seen.insert(key).second);
  }
}

TEST_CASE("surface_to_frame inverts frame_to_surface") {
  SpindleSpec spec = rexroth_32x20();
  const int width = 320, height = 240;
  Calibration cal = test_cal(spec.circumference_mm() / (16.0 * height));

  std::mt19937 rng(7);
  std::uniform_int_distribution<int> frame_dist(0, 23);
  std::uniform_real_distribution<double> row_dist(0.0, height - 1.0);
  std::uniform_real_distribution<double> col_dist(0.0, width - 1.0);
  for (int i = 0; i < 500; ++i) {
    int k = frame_dist(rng);
    FrameRef frame = frame_at(k, width, height);
    PixelCoord px{row_dist(rng), col_dist(rng)};
    auto c = frame_to_surface(cal, spec, frame, px);
    auto back = surface_to_frame(cal, spec, frame, c);
    REQUIRE(back.has_value());
    CHECK(back->row == doctest::Approx(px.row).epsilon(1e-6));
    CHECK(back->col == doctest::Approx(px.col).epsilon(1e-6));
  }
}

TEST_CASE("doubling the scale doubles within-frame offsets") {
  SpindleSpec spec = rexroth_32x20();
  Calibration cal1 = test_cal(0.013);
  Calibration cal2 = test_cal(0.026);
  FrameRef frame = frame_at(3);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> row_dist(0.0, 479.0);
  std::uniform_real_distribution<double> col_dist(0.0, 639.0);
  for (int i = 0; i < 200; ++i) {
    PixelCoord px{row_dist(rng), col_dist(rng)};
    auto origin1 = frame_to_surface(cal1, spec, frame, PixelCoord{0, 0});
    auto origin2 = frame_to_surface(cal2, spec, frame, PixelCoord{0, 0});
    auto c1 = frame_to_surface(cal1, spec, frame, px);
    auto c2 = frame_to_surface(cal2, spec, frame, px);
    CHECK(c2.axial_mm - origin2.axial_mm ==
          doctest::Approx(2.0 * (c1.axial_mm - origin1.axial_mm)).epsilon(1e-9));
    CHECK(c2.tangential_mm - origin2.tangential_mm ==
          doctest::Approx(2.0 * (c1.tangential_mm - origin1.tangential_mm)).epsilon(1e-9));
  }
}

TEST_CASE("tangential distance wraps around the circumference") {
  double c = 100.0;
  CHECK(tangential_distance(1.0, 99.0, c) == doctest::Approx(2.0));
  CHECK(tangential_distance(0.0, 50.0, c) == doctest::Approx(50.0));
  CHECK(wrap_tangential(-3.0, c) == doctest::Approx(97.0));
  CHECK(wrap_tangential(203.0, c) == doctest::Approx(3.0));
}
