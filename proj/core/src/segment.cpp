#include "bsdwear/segment.hpp"

#include <algorithm>
#include <opencv2/imgproc.hpp>
#include <sstream>
#include <stdexcept>

namespace bsdwear {

ValidationResult validate(const SegmentationParams& params) {
  ValidationResult r;
  if (params.blur_radius_px < 0) r.violations.push_back("blur_radius_px must be >= 0");
  if (params.diff_threshold && (*params.diff_threshold < 0 || *params.diff_threshold > 255))
    r.violations.push_back("diff_threshold must lie in [0, 255]");
  if (params.min_auto_threshold < 0 || params.min_auto_threshold > 255)
    r.violations.push_back("min_auto_threshold must lie in [0, 255]");
  if (params.min_region_px < 1) r.violations.push_back("min_region_px must be >= 1");
  if (params.closing_radius_px < 0) r.violations.push_back("closing_radius_px must be >= 0");
  if (params.connectivity != 4 && params.connectivity != 8)
    r.violations.push_back("connectivity must be 4 or 8");
  return r;
}

cv::Mat to_grayscale(const cv::Mat& image) {
  if (image.empty()) throw std::invalid_argument("to_grayscale: empty image");
  if (image.type() == CV_8UC1) return image;
  if (image.type() == CV_8UC3) {
    cv::Mat gray;
    cv::cvtColor(image, gray, cv::COLOR_BGR2GRAY);
    return gray;
  }
  throw std::invalid_argument("to_grayscale: expected 8-bit grayscale or BGR image");
}

int otsu_threshold(const cv::Mat& gray) {
  CV_Assert(gray.type() == CV_8UC1);
  cv::Mat ignored;
  return static_cast<int>(
      cv::threshold(gray, ignored, 0, 255, cv::THRESH_BINARY | cv::THRESH_OTSU));
}

namespace {

cv::Mat smooth(const cv::Mat& gray, int blur_radius_px) {
  if (blur_radius_px <= 0) return gray.clone();
  int k = 2 * blur_radius_px + 1;
  cv::Mat out;
  cv::GaussianBlur(gray, out, cv::Size(k, k), 0.0);
  return out;
}

}  // namespace

const cv::Mat* ReferenceMap::find(int frame_index) const {
  auto it = refs_.find(frame_index);
  return it == refs_.end() ? nullptr : &it->second;
}

ReferenceMap build_reference(const std::vector<std::pair<int, cv::Mat>>& drive0_frames,
                             const SegmentationParams& params) {
  if (drive0_frames.empty())
    throw std::invalid_argument("build_reference: no drive-0 frames given");

  ReferenceMap map;
  cv::Size expected;
  for (const auto& [index, image] : drive0_frames) {
    cv::Mat gray = to_grayscale(image);
    if (expected.empty()) expected = gray.size();
    if (gray.size() != expected) {
      std::ostringstream os;
      os << "build_reference: frame_index " << index << " has size " << gray.cols << "x"
         << gray.rows << ", expected " << expected.width << "x" << expected.height;
      throw std::invalid_argument(os.str());
    }
    if (map.refs_.count(index)) {
      std::ostringstream os;
      os << "build_reference: duplicate frame_index " << index;
      throw std::invalid_argument(os.str());
    }
    map.refs_[index] = smooth(gray, params.blur_radius_px);
  }
  return map;
}

PitObservation measure_region(std::span<const cv::Point> region_pixels, const FrameRef& frame,
                              const Calibration& cal, const SpindleSpec& spec) {
  if (region_pixels.empty()) throw std::invalid_argument("measure_region: empty region");

  int min_row = frame.height_px, max_row = -1;
  int min_col = frame.width_px, max_col = -1;
  double sum_row = 0.0, sum_col = 0.0;
  for (const auto& p : region_pixels) {
    if (p.y < 0 || p.y >= frame.height_px || p.x < 0 || p.x >= frame.width_px)
      throw std::out_of_range("measure_region: pixel outside frame bounds");
    min_row = std::min(min_row, p.y);
    max_row = std::max(max_row, p.y);
    min_col = std::min(min_col, p.x);
    max_col = std::max(max_col, p.x);
    sum_row += p.y;
    sum_col += p.x;
  }
  const auto count = static_cast<double>(region_pixels.size());
  double row_extent = static_cast<double>(max_row - min_row + 1);
  double col_extent = static_cast<double>(max_col - min_col + 1);

  PitObservation obs;
  obs.drive_index = frame.drive_index;
  obs.frame = frame;
  obs.pixel_count = static_cast<std::int64_t>(region_pixels.size());
  obs.area_mm2 = count * area_scale(cal);
  if (cal.axial_axis == ImageAxis::Columns) {
    obs.axial_length_mm = col_extent * cal.mm_per_px;
    obs.tangential_length_mm = row_extent * cal.mm_per_px;
  } else {
    obs.axial_length_mm = row_extent * cal.mm_per_px;
    obs.tangential_length_mm = col_extent * cal.mm_per_px;
  }
  obs.centroid =
      frame_to_surface(cal, spec, frame, PixelCoord{sum_row / count, sum_col / count});
  return obs;
}

std::vector<PitObservation> segment_frame(const cv::Mat& frame_image, const FrameRef& frame,
                                          const ReferenceMap& ref,
                                          const SegmentationParams& params,
                                          const Calibration& cal, const SpindleSpec& spec) {
  const cv::Mat* reference = ref.find(frame.frame_index);
  if (!reference) {
    std::ostringstream os;
    os << "segment_frame: no reference for frame_index " << frame.frame_index;
    throw std::invalid_argument(os.str());
  }
  cv::Mat gray = to_grayscale(frame_image);
  if (gray.size() != reference->size())
    throw std::invalid_argument("segment_frame: frame size differs from reference");
  if (gray.rows != frame.height_px || gray.cols != frame.width_px)
    throw std::invalid_argument("segment_frame: frame size differs from FrameRef");

  cv::Mat diff;
  cv::absdiff(smooth(gray, params.blur_radius_px), *reference, diff);

  int threshold = params.diff_threshold
                      ? *params.diff_threshold
                      : std::max(otsu_threshold(diff), params.min_auto_threshold);
  cv::Mat mask;
  cv::threshold(diff, mask, threshold, 255, cv::THRESH_BINARY);

  if (params.closing_radius_px > 0) {
    int k = 2 * params.closing_radius_px + 1;
    cv::Mat kernel = cv::getStructuringElement(cv::MORPH_ELLIPSE, cv::Size(k, k));
    cv::morphologyEx(mask, mask, cv::MORPH_CLOSE, kernel);
  }

  cv::Mat labels, stats, centroids;
  int n_labels = cv::connectedComponentsWithStats(mask, labels, stats, centroids,
                                                  params.connectivity, CV_32S);

  std::vector<std::vector<cv::Point>> regions(static_cast<std::size_t>(n_labels));
  for (int lbl = 1; lbl < n_labels; ++lbl)
    regions[static_cast<std::size_t>(lbl)].reserve(
        static_cast<std::size_t>(stats.at<int>(lbl, cv::CC_STAT_AREA)));
  for (int r = 0; r < labels.rows; ++r) {
    const int* row = labels.ptr<int>(r);
    for (int c = 0; c < labels.cols; ++c)
      if (row[c] > 0) regions[static_cast<std::size_t>(row[c])].emplace_back(c, r);
  }

  std::vector<PitObservation> observations;
  for (int lbl = 1; lbl < n_labels; ++lbl) {
    const auto& px = regions[static_cast<std::size_t>(lbl)];
    if (static_cast<int>(px.size()) < params.min_region_px) continue;
    observations.push_back(measure_region(px, frame, cal, spec));
  }
  std::sort(observations.begin(), observations.end(), [](const auto& a, const auto& b) {
    if (a.centroid.axial_mm != b.centroid.axial_mm)
      return a.centroid.axial_mm < b.centroid.axial_mm;
    return a.centroid.tangential_mm < b.centroid.tangential_mm;
  });
  return observations;
}

}  // namespace bsdwear
