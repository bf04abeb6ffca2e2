#include <doctest.h>

#include <opencv2/imgproc.hpp>
#include <queue>
#include <random>

#include "bsdwear/segment.hpp"

using namespace bsdwear;

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;
constexpr uchar kBackground = 180;
constexpr uchar kPitGray = 60;

Calibration test_cal(double mm_per_px = 0.01) {
  Calibration cal;
  cal.mm_per_px = mm_per_px;
  cal.axial_axis = ImageAxis::Columns;  // tangential runs along rows
  cal.angular_step_deg = 22.5;
  return cal;
}

FrameRef frame0(int width = kWidth, int height = kHeight) {
  FrameRef f;
  f.drive_index = 1;
  f.frame_index = 0;
  f.rotation_step_deg = 0.0;
  f.width_px = width;
  f.height_px = height;
  return f;
}

cv::Mat flat_frame(uchar value = kBackground, int width = kWidth, int height = kHeight) {
  return cv::Mat(height, width, CV_8UC1, cv::Scalar(value));
}

ReferenceMap flat_reference(const SegmentationParams& params) {
  std::vector<std::pair<int, cv::Mat>> frames{{0, flat_frame()}};
  return build_reference(frames, params);
}

// Independent region counter: flood fill over the pit-colored mask.
int count_regions_bruteforce(const cv::Mat& img, int connectivity) {
  cv::Mat visited = cv::Mat::zeros(img.size(), CV_8UC1);
  int regions = 0;
  const int dr8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
  const int dc8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
  const int dr4[] = {-1, 0, 0, 1};
  const int dc4[] = {0, -1, 1, 0};
  const int* dr = connectivity == 4 ? dr4 : dr8;
  const int* dc = connectivity == 4 ? dc4 : dc8;
  int n = connectivity == 4 ? 4 : 8;
  for (int r = 0; r < img.rows; ++r) {
    for (int c = 0; c < img.cols; ++c) {
      if (img.at<uchar>(r, c) == kBackground || visited.at<uchar>(r, c)) continue;
      ++regions;
      std::queue<cv::Point> q;
      q.emplace(c, r);
      visited.at<uchar>(r, c) = 1;
      while (!q.empty()) {
        cv::Point p = q.front();
        q.pop();
        for (int i = 0; i < n; ++i) {
          int rr = p.y + dr[i], cc = p.x + dc[i];
          if (rr < 0 || rr >= img.rows || cc < 0 || cc >= img.cols) continue;
          if (visited.at<uchar>(rr, cc) || img.at<uchar>(rr, cc) == kBackground) continue;
          visited.at<uchar>(rr, cc) = 1;
          q.emplace(cc, rr);
        }
      }
    }
  }
  return regions;
}

}  // namespace

TEST_CASE("a frame identical to its reference yields nothing") {
  SegmentationParams params;
  auto ref = flat_reference(params);
  auto obs = segment_frame(flat_frame(), frame0(), ref, params, test_cal(), rexroth_32x20());
  CHECK(obs.empty());
}

TEST_CASE("a single dark ellipse is measured against the pixel-count oracle") {
  SegmentationParams params;
  auto ref = flat_reference(params);
  SpindleSpec spec = rexroth_32x20();
  Calibration cal = test_cal();

  cv::Mat img = flat_frame();
  // tangential extent 100 px (rows), axial extent 20 px (columns)
  cv::ellipse(img, cv::Point(300, 200), cv::Size(10, 50), 0.0, 0.0, 360.0,
              cv::Scalar(kPitGray), cv::FILLED);
  int oracle_pixels = static_cast<int>(img.total()) - cv::countNonZero(img == kBackground);

  auto obs = segment_frame(img, frame0(), ref, params, cal, spec);
  REQUIRE(obs.size() == 1);
  const auto& o = obs.front();
  CHECK(o.tangential_length_mm == doctest::Approx(1.0).epsilon(0.05));
  CHECK(o.axial_length_mm == doctest::Approx(0.2).epsilon(0.1));
  CHECK(o.area_mm2 == doctest::Approx(oracle_pixels * 1e-4).epsilon(0.02));
  CHECK(o.area_mm2 == doctest::Approx(kPi / 4.0 * 1.0 * 0.2).epsilon(0.06));
  CHECK(o.area_mm2 <= o.axial_length_mm * o.tangential_length_mm * (1 + 1e-12));
  CHECK(o.pixel_count >= 25);

  SUBCASE("centroid maps through the surface transform") {
    CHECK(o.centroid.axial_mm == doctest::Approx(3.0).epsilon(0.01));      // col 300 * 0.01
    CHECK(o.centroid.tangential_mm == doctest::Approx(2.0).epsilon(0.01)); // row 200 * 0.01
  }
}

TEST_CASE("two separated ellipses match the brute-force region count") {
  SegmentationParams params;
  auto ref = flat_reference(params);
  cv::Mat img = flat_frame();
  cv::ellipse(img, cv::Point(150, 120), cv::Size(12, 40), 0, 0, 360, cv::Scalar(kPitGray),
              cv::FILLED);
  cv::ellipse(img, cv::Point(420, 330), cv::Size(9, 30), 0, 0, 360, cv::Scalar(kPitGray),
              cv::FILLED);

  int expected = count_regions_bruteforce(img, params.connectivity);
  auto obs = segment_frame(img, frame0(), ref, params, test_cal(), rexroth_32x20());
  CHECK(expected == 2);
  CHECK(obs.size() == static_cast<std::size_t>(expected));
}

TEST_CASE("reference construction") {
  SegmentationParams params;

  SUBCASE("a full revolution of camera frames gives sixteen entries") {
    std::vector<std::pair<int, cv::Mat>> frames;
    for (int f = 0; f < 16; ++f) frames.emplace_back(f, flat_frame(kBackground, 2592, 1944));
    auto ref = build_reference(frames, params);
    CHECK(ref.size() == 16);
    REQUIRE(ref.find(7) != nullptr);
    CHECK(ref.find(7)->cols == 2592);
    CHECK(ref.find(16) == nullptr);
  }
  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(build_reference({}, params), std::invalid_argument);
  }
  SUBCASE("duplicate indices are rejected") {
    std::vector<std::pair<int, cv::Mat>> frames{{0, flat_frame()}, {0, flat_frame()}};
    CHECK_THROWS_AS(build_reference(frames, params), std::invalid_argument);
  }
  SUBCASE("dimension mismatch names the frame") {
    std::vector<std::pair<int, cv::Mat>> frames{{0, flat_frame()},
                                                {3, flat_frame(kBackground, 100, 100)}};
    try {
      build_reference(frames, params);
      FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("frame_index 3") != std::string::npos);
    }
  }
}

TEST_CASE("segmentation error paths") {
  SegmentationParams params;
  auto ref = flat_reference(params);

  FrameRef other = frame0();
  other.frame_index = 5;  // no reference stored for this position
  CHECK_THROWS_AS(segment_frame(flat_frame(), other, ref, params, test_cal(), rexroth_32x20()),
                  std::invalid_argument);

  CHECK_THROWS_AS(segment_frame(flat_frame(kBackground, 111, 99), frame0(), ref, params,
                                test_cal(), rexroth_32x20()),
                  std::invalid_argument);
}

TEST_CASE("raising the fixed threshold never grows the segmented pixel count") {
  SegmentationParams params;
  params.min_region_px = 1;
  auto ref = flat_reference(params);
  SpindleSpec spec = rexroth_32x20();
  Calibration cal = test_cal();

  cv::Mat img = flat_frame();
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> col(20, kWidth - 20), row(20, kHeight - 20);
  std::uniform_int_distribution<int> radius(2, 18), depth(30, 160);
  for (int i = 0; i < 40; ++i) {
    cv::circle(img, cv::Point(col(rng), row(rng)), radius(rng),
               cv::Scalar(kBackground - depth(rng)), cv::FILLED);
  }

  std::int64_t previous = std::numeric_limits<std::int64_t>::max();
  for (int threshold : {5, 20, 40, 60, 90, 130, 200}) {
    params.diff_threshold = threshold;
    auto obs = segment_frame(img, frame0(), ref, params, cal, spec);
    std::int64_t total = 0;
    for (const auto& o : obs) total += o.pixel_count;
    CHECK(total <= previous);
    previous = total;
  }
}

TEST_CASE("integer shifts move the centroid and nothing else") {
  SegmentationParams params;
  auto ref = flat_reference(params);
  SpindleSpec spec = rexroth_32x20();
  Calibration cal = test_cal();

  auto draw = [&](int col, int row) {
    cv::Mat img = flat_frame();
    cv::ellipse(img, cv::Point(col, row), cv::Size(11, 37), 0, 0, 360, cv::Scalar(kPitGray),
                cv::FILLED);
    return segment_frame(img, frame0(), ref, params, cal, spec);
  };

  auto base = draw(200, 150);
  auto moved = draw(200 + 57, 150 + 23);
  REQUIRE(base.size() == 1);
  REQUIRE(moved.size() == 1);
  CHECK(moved[0].axial_length_mm == base[0].axial_length_mm);
  CHECK(moved[0].tangential_length_mm == base[0].tangential_length_mm);
  CHECK(moved[0].area_mm2 == base[0].area_mm2);
  CHECK(moved[0].centroid.axial_mm - base[0].centroid.axial_mm ==
        doctest::Approx(0.57).epsilon(1e-6));
  CHECK(moved[0].centroid.tangential_mm - base[0].centroid.tangential_mm ==
        doctest::Approx(0.23).epsilon(1e-6));
}

TEST_CASE("identical inputs produce identical ordered results") {
  SegmentationParams params;
  auto ref = flat_reference(params);
  SpindleSpec spec = rexroth_32x20();
  Calibration cal = test_cal();

  cv::Mat img = flat_frame();
  cv::ellipse(img, cv::Point(420, 100), cv::Size(8, 30), 0, 0, 360, cv::Scalar(kPitGray),
              cv::FILLED);
  cv::ellipse(img, cv::Point(150, 300), cv::Size(8, 30), 0, 0, 360, cv::Scalar(kPitGray),
              cv::FILLED);

  auto first = segment_frame(img, frame0(), ref, params, cal, spec);
  auto second = segment_frame(img, frame0(), ref, params, cal, spec);
  REQUIRE(first.size() == second.size());
  REQUIRE(first.size() == 2);
  // ordered by centroid axial coordinate
  CHECK(first[0].centroid.axial_mm < first[1].centroid.axial_mm);
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].centroid.axial_mm == second[i].centroid.axial_mm);
    CHECK(first[i].pixel_count == second[i].pixel_count);
  }
}

TEST_CASE("regions below the minimum size are discarded") {
  SegmentationParams params;
  params.closing_radius_px = 0;
  auto ref = flat_reference(params);
  cv::Mat img = flat_frame();
  cv::circle(img, cv::Point(100, 100), 2, cv::Scalar(kPitGray), cv::FILLED);  // ~13 px
  auto obs = segment_frame(img, frame0(), ref, params, test_cal(), rexroth_32x20());
  CHECK(obs.empty());
}

TEST_CASE("connectivity distinguishes diagonal contact") {
  SegmentationParams params;
  params.blur_radius_px = 0;
  params.closing_radius_px = 0;
  params.min_region_px = 1;
  params.diff_threshold = 50;
  auto ref = flat_reference(params);
  SpindleSpec spec = rexroth_32x20();
  Calibration cal = test_cal();

  // Two solid squares touching only at one corner.
  cv::Mat img = flat_frame();
  cv::rectangle(img, cv::Point(100, 100), cv::Point(109, 109), cv::Scalar(kPitGray),
                cv::FILLED);
  cv::rectangle(img, cv::Point(110, 110), cv::Point(119, 119), cv::Scalar(kPitGray),
                cv::FILLED);

  params.connectivity = 8;
  CHECK(segment_frame(img, frame0(), ref, params, cal, spec).size() == 1);
  params.connectivity = 4;
  CHECK(segment_frame(img, frame0(), ref, params, cal, spec).size() == 2);
}

TEST_CASE("region measurement") {
  SpindleSpec spec = rexroth_32x20();
  Calibration cal = test_cal();

  SUBCASE("single pixel") {
    std::vector<cv::Point> px{{5, 7}};
    auto o = measure_region(px, frame0(), cal, spec);
    CHECK(o.axial_length_mm == doctest::Approx(0.01));
    CHECK(o.tangential_length_mm == doctest::Approx(0.01));
    CHECK(o.area_mm2 == doctest::Approx(1e-4));
    CHECK(o.pixel_count == 1);
  }
  SUBCASE("axis-aligned rectangle") {
    std::vector<cv::Point> px;
    for (int r = 50; r < 150; ++r)      // 100 rows (tangential)
      for (int c = 30; c < 50; ++c)     // 20 columns (axial)
        px.emplace_back(c, r);
    auto o = measure_region(px, frame0(), cal, spec);
    CHECK(o.tangential_length_mm == doctest::Approx(1.0));
    CHECK(o.axial_length_mm == doctest::Approx(0.2));
    CHECK(o.area_mm2 == doctest::Approx(0.2));
  }
  SUBCASE("rasterized ellipse fill factor is about pi/4") {
    cv::Mat img = cv::Mat::zeros(kHeight, kWidth, CV_8UC1);
    cv::ellipse(img, cv::Point(300, 200), cv::Size(10, 50), 0, 0, 360, cv::Scalar(255),
                cv::FILLED);
    std::vector<cv::Point> px;
    for (int r = 0; r < img.rows; ++r)
      for (int c = 0; c < img.cols; ++c)
        if (img.at<uchar>(r, c)) px.emplace_back(c, r);
    auto o = measure_region(px, frame0(), cal, spec);
    CHECK(o.area_mm2 / (o.axial_length_mm * o.tangential_length_mm) ==
          doctest::Approx(kPi / 4.0).epsilon(0.065));
  }
  SUBCASE("empty region is an error") {
    std::vector<cv::Point> none;
    CHECK_THROWS_AS(measure_region(none, frame0(), cal, spec), std::invalid_argument);
  }
}

TEST_CASE("color frames reduce to luma before processing") {
  SegmentationParams params;
  auto ref = flat_reference(params);
  cv::Mat gray = flat_frame();
  cv::ellipse(gray, cv::Point(320, 240), cv::Size(10, 40), 0, 0, 360, cv::Scalar(kPitGray),
              cv::FILLED);
  cv::Mat color;
  cv::cvtColor(gray, color, cv::COLOR_GRAY2BGR);

  auto from_gray = segment_frame(gray, frame0(), ref, params, test_cal(), rexroth_32x20());
  auto from_color = segment_frame(color, frame0(), ref, params, test_cal(), rexroth_32x20());
  REQUIRE(from_gray.size() == 1);
  REQUIRE(from_color.size() == 1);
  CHECK(from_gray[0].pixel_count == from_color[0].pixel_count);
}
