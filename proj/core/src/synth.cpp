#include "bsdwear/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bsdwear/curves.hpp"

namespace bsdwear {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string iso_utc(std::int64_t hours_since_epoch) {
  using namespace std::chrono;
  // Fixed origin keeps simulated metadata reproducible run to run.
  sys_days origin = sys_days(year{2026} / January / 1);
  auto tp = origin + std::chrono::hours(hours_since_epoch);
  auto dp = floor<days>(tp);
  year_month_day ymd(dp);
  hh_mm_ss hms(tp - dp);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02ldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

constexpr double kPlacementPad_mm = 0.2;
constexpr std::array<std::pair<double, double>, 3> kPhaseIntervals{
    {{0.2, 0.6}, {0.6, 0.8}, {0.8, 1.0}}};

}  // namespace

double PitTrajectory::birth_size_mm() const { return axial_at(t0); }

double PitTrajectory::axial_at(double t) const {
  double tau = (t - t0) + birth_offset;
  return axial_saturation_mm * (1.0 - std::exp(-axial_rate * tau)) + axial_linear_mm * tau;
}

double PitTrajectory::tangential_at(double t) const {
  double dt = t - t0;
  return birth_size_mm() + tangential_base_mm * dt + tangential_accel * dt * dt;
}

std::pair<double, double> PitTrajectory::size_at(double t) const {
  if (t < t0 - 1e-12) throw std::invalid_argument("PitTrajectory: time before birth");
  return {axial_at(t), tangential_at(t)};
}

Calibration ScenarioConfig::derive_calibration() const {
  Calibration cal;
  cal.angular_step_deg = 22.5;
  cal.axial_axis = ImageAxis::Columns;
  // Rows run tangentially; one frame height spans exactly one angular step.
  cal.mm_per_px = spindle.circumference_mm() /
                  (static_cast<double>(cal.frames_per_revolution()) * height_px);
  return cal;
}

double GroundTruth::drive_fraction(int drive_index) const {
  int failure = config.resolved_failure_drive();
  double per_drive = config.revolutions_per_drive();
  return (drive_index * per_drive) / (failure * per_drive);
}

GroundTruth generate_scenario(const ScenarioConfig& config) {
  if (config.n_drives < 2) throw std::invalid_argument("generate_scenario: need >= 2 drives");
  int failure = config.resolved_failure_drive();
  if (failure < 1 || failure >= config.n_drives)
    throw std::invalid_argument("generate_scenario: failure_drive out of range");
  if (config.frames_per_drive < 1 || config.width_px < 1 || config.height_px < 1)
    throw std::invalid_argument("generate_scenario: bad frame geometry");
  for (double rate : config.birth_rates)
    if (!(rate >= 0.0)) throw std::invalid_argument("generate_scenario: negative birth rate");
  auto spec_check = validate_spec(config.spindle);
  if (!spec_check.ok())
    throw std::invalid_argument("generate_scenario: invalid spindle: " +
                                spec_check.violations.front());

  GroundTruth truth;
  truth.config = config;
  truth.calibration = config.derive_calibration();

  std::mt19937_64 rng(config.seed);

  // Births: piecewise-constant intensity over normalized life, expressed as
  // expected births per drive within each phase.
  std::vector<double> birth_times;
  for (std::size_t phase = 0; phase < 3; ++phase) {
    auto [lo, hi] = kPhaseIntervals[phase];
    double expected = config.birth_rates[phase] * (hi - lo) * failure;
    if (!(expected > 0.0)) continue;
    std::poisson_distribution<int> count_dist(expected);
    int count = count_dist(rng);
    std::uniform_real_distribution<double> time_dist(lo, hi);
    for (int i = 0; i < count; ++i) birth_times.push_back(time_dist(rng));
  }
  std::sort(birth_times.begin(), birth_times.end());

  const Calibration& cal = truth.calibration;
  const double s = cal.mm_per_px;
  const double ax_step = axial_step_mm(cal, config.spindle);
  const double tan_step = tangential_step_mm(cal, config.spindle);
  const double ax_span = config.width_px * s;
  const double circumference = config.spindle.circumference_mm();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> frame_dist(0, config.frames_per_drive - 1);
  auto jittered = [&](double base) {
    return base * (1.0 + config.param_jitter * (2.0 * unit(rng) - 1.0));
  };

  auto first_live_drive = [&](double t0) {
    for (int d = 0; d < config.n_drives; ++d)
      if (!(t0 > truth.drive_fraction(d))) return d;
    return config.n_drives - 1;
  };

  int next_id = 0;
  for (double t0 : birth_times) {
    GroundTruthPit pit;
    pit.id = next_id++;
    pit.t0 = t0;
    pit.birth_drive = first_live_drive(t0);

    PitTrajectory traj;
    traj.t0 = t0;
    traj.birth_offset = config.birth_offset;
    traj.axial_saturation_mm = jittered(config.axial_saturation_mm);
    traj.axial_rate = jittered(config.axial_rate);
    traj.axial_linear_mm = config.axial_linear_mm;
    traj.tangential_base_mm = jittered(config.tangential_base_mm);
    traj.tangential_accel = jittered(config.tangential_accel);
    pit.trajectory = traj;

    auto [a_final, b_final] = traj.size_at(1.0);

    bool placed = false;
    for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
      int k = frame_dist(rng);
      double ax_lo = k * ax_step + 0.5 * a_final + kPlacementPad_mm;
      double ax_hi = k * ax_step + ax_span - 0.5 * a_final - kPlacementPad_mm;
      double tan_lo = 0.5 * b_final + kPlacementPad_mm;
      double tan_hi = tan_step - 0.5 * b_final - kPlacementPad_mm;
      if (ax_hi <= ax_lo || tan_hi <= tan_lo) continue;

      SurfaceCoord c;
      c.axial_mm = ax_lo + unit(rng) * (ax_hi - ax_lo);
      c.tangential_mm =
          wrap_tangential(k * tan_step + tan_lo + unit(rng) * (tan_hi - tan_lo), circumference);

      bool ok = true;
      for (const auto& other : truth.pits) {
        if (surface_distance(c, other.centroid, circumference) < config.min_separation_mm) {
          ok = false;
          break;
        }
        auto [oa, ob] = other.trajectory.size_at(1.0);
        double da = std::abs(c.axial_mm - other.centroid.axial_mm);
        double dt = tangential_distance(c.tangential_mm, other.centroid.tangential_mm,
                                        circumference);
        if (da < 0.5 * (a_final + oa) + kPlacementPad_mm &&
            dt < 0.5 * (b_final + ob) + kPlacementPad_mm) {
          ok = false;
          break;
        }
      }
      if (ok) {
        pit.centroid = c;
        placed = true;
      }
    }
    if (!placed) {
      std::ostringstream os;
      os << "generate_scenario: could not place pit " << pit.id << " of "
         << birth_times.size() << " with separation >= " << config.min_separation_mm
         << " mm on the imaged strip";
      throw std::runtime_error(os.str());
    }
    truth.pits.push_back(pit);
  }

  truth.drive_states = compute_drive_states(config, truth.pits);
  return truth;
}

std::vector<std::vector<GroundTruthState>> compute_drive_states(
    const ScenarioConfig& config, const std::vector<GroundTruthPit>& pits) {
  GroundTruth scratch;
  scratch.config = config;
  std::vector<std::vector<GroundTruthState>> states(
      static_cast<std::size_t>(config.n_drives));
  for (int d = 0; d < config.n_drives; ++d) {
    double t = scratch.drive_fraction(d);
    for (const auto& pit : pits) {
      if (pit.t0 > t) continue;
      auto [a, b] = pit.trajectory.size_at(t);
      states[static_cast<std::size_t>(d)].push_back({pit.id, a, b, ellipse_area(a, b)});
    }
  }
  return states;
}

double ellipse_coverage(double row, double col, double center_row, double center_col,
                        double semi_row_px, double semi_col_px, double roughness,
                        std::uint64_t roughness_phase) {
  constexpr int kGrid = 4;
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  if (roughness > 0.0) {
    p1 = 2.0 * kPi * (mix64(roughness_phase) % 4096) / 4096.0;
    p2 = 2.0 * kPi * (mix64(roughness_phase + 1) % 4096) / 4096.0;
    p3 = 2.0 * kPi * (mix64(roughness_phase + 2) % 4096) / 4096.0;
  }
  int inside = 0;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      double y = row - 0.5 + (i + 0.5) / kGrid;
      double x = col - 0.5 + (j + 0.5) / kGrid;
      double u = (y - center_row) / semi_row_px;
      double v = (x - center_col) / semi_col_px;
      double limit = 1.0;
      if (roughness > 0.0) {
        double theta = std::atan2(u, v);
        limit += roughness * (0.5 * std::sin(3.0 * theta + p1) +
                              0.3 * std::sin(5.0 * theta + p2) +
                              0.2 * std::sin(7.0 * theta + p3));
      }
      if (u * u + v * v <= limit * limit) ++inside;
    }
  }
  return static_cast<double>(inside) / (kGrid * kGrid);
}

namespace {

cv::Mat make_texture(std::uint64_t texture_seed, int frame_index, int width, int height) {
  std::mt19937_64 rng(mix64(texture_seed ^ mix64(static_cast<std::uint64_t>(frame_index) + 1)));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> freq(1.5, 6.0);
  std::uniform_real_distribution<double> amp(5.0, 11.0);

  // Separable low-frequency shading over a mid-gray base.
  std::vector<double> row_pat(static_cast<std::size_t>(height));
  std::vector<double> col_pat(static_cast<std::size_t>(width));
  double f1 = freq(rng), p1 = phase(rng), a1 = amp(rng);
  double f2 = freq(rng), p2 = phase(rng), a2 = amp(rng);
  for (int r = 0; r < height; ++r)
    row_pat[static_cast<std::size_t>(r)] =
        a1 * std::sin(2.0 * kPi * f1 * r / height + p1);
  double f3 = freq(rng), p3 = phase(rng), a3 = amp(rng);
  for (int c = 0; c < width; ++c)
    col_pat[static_cast<std::size_t>(c)] =
        a2 * std::sin(2.0 * kPi * f2 * c / width + p2) +
        a3 * std::sin(2.0 * kPi * f3 * c / width + p3);

  cv::Mat tex(height, width, CV_8UC1);
  for (int r = 0; r < height; ++r) {
    uchar* out = tex.ptr<uchar>(r);
    double base = 172.0 + row_pat[static_cast<std::size_t>(r)];
    for (int c = 0; c < width; ++c) {
      double v = base + col_pat[static_cast<std::size_t>(c)];
      out[c] = cv::saturate_cast<uchar>(v);
    }
  }
  return tex;
}

}  // namespace

SceneRenderer::SceneRenderer(const GroundTruth& truth)
    : SceneRenderer(truth, truth.calibration, truth.config.spindle) {}

SceneRenderer::SceneRenderer(const GroundTruth& truth, const Calibration& cal,
                             const SpindleSpec& spec)
    : truth_(truth), cal_(cal), spec_(spec) {
  const auto& cfg = truth.config;
  textures_.reserve(static_cast<std::size_t>(cfg.frames_per_drive));
  for (int f = 0; f < cfg.frames_per_drive; ++f)
    textures_.push_back(make_texture(cfg.texture_seed, f, cfg.width_px, cfg.height_px));
}

const cv::Mat& SceneRenderer::texture(int frame_index) const {
  return textures_.at(static_cast<std::size_t>(frame_index));
}

FrameRef SceneRenderer::frame_ref(int drive_index, int frame_index) const {
  FrameRef ref;
  ref.drive_index = drive_index;
  ref.frame_index = frame_index;
  ref.rotation_step_deg = std::fmod(frame_index * cal_.angular_step_deg, 360.0);
  ref.width_px = truth_.config.width_px;
  ref.height_px = truth_.config.height_px;
  return ref;
}

DriveMeta SceneRenderer::drive_meta(int drive_index) const {
  const auto& cfg = truth_.config;
  DriveMeta meta;
  meta.drive_index = drive_index;
  meta.cumulative_revolutions = drive_index * cfg.revolutions_per_drive();
  meta.frame_count = cfg.frames_per_drive;
  meta.wall_time = iso_utc(static_cast<std::int64_t>(
      std::llround(drive_index * cfg.drive_period_hours)));
  // Informational ramp toward the 70 C bench abort level at failure.
  double frac = std::min(truth_.drive_fraction(drive_index), 1.0);
  meta.flange_temperature_C = 30.0 + 40.0 * frac;
  return meta;
}

cv::Mat SceneRenderer::render_frame(int drive_index, int frame_index) const {
  const auto& cfg = truth_.config;
  if (drive_index < 0 || drive_index >= cfg.n_drives)
    throw std::invalid_argument("render_frame: drive_index out of range");
  if (frame_index < 0 || frame_index >= cfg.frames_per_drive)
    throw std::invalid_argument("render_frame: frame_index out of range");

  cv::Mat img;
  texture(frame_index).convertTo(img, CV_32F);
  FrameRef ref = frame_ref(drive_index, frame_index);

  const double s = cal_.mm_per_px;
  for (const auto& state : truth_.drive_states[static_cast<std::size_t>(drive_index)]) {
    const auto& pit = truth_.pits[static_cast<std::size_t>(state.pit_id)];
    auto center = surface_to_frame(cal_, spec_, ref, pit.centroid);
    if (!center) continue;

    double semi_col = 0.5 * state.axial_mm / s;      // axial axis = columns
    double semi_row = 0.5 * state.tangential_mm / s;
    if (cal_.axial_axis == ImageAxis::Rows) std::swap(semi_col, semi_row);
    double margin = 1.0 + truth_.config.boundary_roughness * std::max(semi_row, semi_col);
    int r0 = std::max(0, static_cast<int>(std::floor(center->row - semi_row - margin)));
    int r1 = std::min(cfg.height_px - 1,
                      static_cast<int>(std::ceil(center->row + semi_row + margin)));
    int c0 = std::max(0, static_cast<int>(std::floor(center->col - semi_col - margin)));
    int c1 = std::min(cfg.width_px - 1,
                      static_cast<int>(std::ceil(center->col + semi_col + margin)));

    std::uint64_t phase_key =
        mix64(cfg.seed ^ (static_cast<std::uint64_t>(state.pit_id) * 0x51ed2701ULL));
    for (int r = r0; r <= r1; ++r) {
      float* px = img.ptr<float>(r);
      for (int c = c0; c <= c1; ++c) {
        double cov = ellipse_coverage(r, c, center->row, center->col, semi_row, semi_col,
                                      cfg.boundary_roughness, phase_key);
        if (cov > 0.0) px[c] -= static_cast<float>(cfg.pit_contrast * cov);
      }
    }
  }

  if (cfg.noise_sigma > 0.0) {
    cv::RNG rng(mix64(cfg.seed ^ mix64((static_cast<std::uint64_t>(drive_index) << 20) ^
                                       static_cast<std::uint64_t>(frame_index) ^
                                       0xabcdef1234ULL)));
    cv::Mat noise(img.size(), CV_32F);
    rng.fill(noise, cv::RNG::NORMAL, 0.0, cfg.noise_sigma);
    img += noise;
  }

  cv::Mat out;
  img.convertTo(out, CV_8U);
  return out;
}

RenderedDrive SceneRenderer::render_drive(int drive_index) const {
  const auto& cfg = truth_.config;
  RenderedDrive result;
  result.meta = drive_meta(drive_index);
  result.frames.reserve(static_cast<std::size_t>(cfg.frames_per_drive));
  for (int f = 0; f < cfg.frames_per_drive; ++f)
    result.frames.push_back(render_frame(drive_index, f));

  for (const auto& state : truth_.drive_states[static_cast<std::size_t>(drive_index)]) {
    const auto& pit = truth_.pits[static_cast<std::size_t>(state.pit_id)];
    bool visible = false;
    for (int f = 0; f < cfg.frames_per_drive && !visible; ++f)
      visible = surface_to_frame(cal_, spec_, frame_ref(drive_index, f), pit.centroid)
                    .has_value();
    if (!visible) {
      std::ostringstream os;
      os << "pit " << pit.id << " lies outside the imaged strip in drive " << drive_index
         << "; skipped";
      result.warnings.push_back(os.str());
    }
  }
  return result;
}

RenderedDrive render_drive(const GroundTruth& truth, int drive_index, const Calibration& cal,
                           const SpindleSpec& spec) {
  if (drive_index < 0 || drive_index >= truth.config.n_drives)
    throw std::invalid_argument("render_drive: drive_index out of range");
  return SceneRenderer(truth, cal, spec).render_drive(drive_index);
}

std::int64_t count_rendered_pixels(const GroundTruth& truth, int pit_id, int drive_index) {
  const auto& states = truth.drive_states.at(static_cast<std::size_t>(drive_index));
  auto it = std::find_if(states.begin(), states.end(),
                         [&](const auto& s) { return s.pit_id == pit_id; });
  if (it == states.end())
    throw std::invalid_argument("count_rendered_pixels: pit not live at this drive");
  const auto& pit = truth.pits[static_cast<std::size_t>(pit_id)];
  const auto& cfg = truth.config;

  for (int f = 0; f < cfg.frames_per_drive; ++f) {
    FrameRef ref;
    ref.drive_index = drive_index;
    ref.frame_index = f;
    ref.rotation_step_deg = std::fmod(f * truth.calibration.angular_step_deg, 360.0);
    ref.width_px = cfg.width_px;
    ref.height_px = cfg.height_px;
    auto center = surface_to_frame(truth.calibration, cfg.spindle, ref, pit.centroid);
    if (!center) continue;
    double s = truth.calibration.mm_per_px;
    double semi_col = 0.5 * it->axial_mm / s;
    double semi_row = 0.5 * it->tangential_mm / s;
    if (truth.calibration.axial_axis == ImageAxis::Rows) std::swap(semi_col, semi_row);
    std::uint64_t phase_key =
        mix64(cfg.seed ^ (static_cast<std::uint64_t>(pit_id) * 0x51ed2701ULL));
    std::int64_t count = 0;
    int r0 = static_cast<int>(std::floor(center->row - semi_row - 2));
    int r1 = static_cast<int>(std::ceil(center->row + semi_row + 2));
    int c0 = static_cast<int>(std::floor(center->col - semi_col - 2));
    int c1 = static_cast<int>(std::ceil(center->col + semi_col + 2));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c)
        if (ellipse_coverage(r, c, center->row, center->col, semi_row, semi_col,
                             cfg.boundary_roughness, phase_key) >= 0.5)
          ++count;
    return count;
  }
  throw std::invalid_argument("count_rendered_pixels: pit not imaged by any frame");
}

std::vector<PitTrack> ground_truth_tracks(const GroundTruth& truth) {
  std::vector<PitTrack> tracks;
  tracks.reserve(truth.pits.size());
  double s = truth.calibration.mm_per_px;
  for (const auto& pit : truth.pits) {
    PitTrack t;
    t.track_id = pit.id;
    t.birth_drive = pit.birth_drive;
    for (int d = 0; d < truth.config.n_drives; ++d) {
      const auto& states = truth.drive_states[static_cast<std::size_t>(d)];
      auto it = std::find_if(states.begin(), states.end(),
                             [&](const auto& st) { return st.pit_id == pit.id; });
      if (it == states.end()) continue;
      PitObservation obs;
      obs.drive_index = d;
      obs.frame.drive_index = d;
      obs.frame.width_px = truth.config.width_px;
      obs.frame.height_px = truth.config.height_px;
      obs.centroid = pit.centroid;
      obs.axial_length_mm = it->axial_mm;
      obs.tangential_length_mm = it->tangential_mm;
      obs.area_mm2 = it->area_mm2;
      obs.pixel_count = static_cast<std::int64_t>(std::llround(it->area_mm2 / (s * s)));
      t.observations.push_back(obs);
    }
    if (!t.observations.empty()) tracks.push_back(t);
  }
  return tracks;
}

}  // namespace bsdwear
