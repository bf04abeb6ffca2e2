#include "bsdwear/store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <sstream>
#include <stdexcept>

namespace bsdwear {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

std::string drive_dir_name(int drive_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "drive_%06d", drive_index);
  return buf;
}

std::string frame_file_name(int frame_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%03d.png", frame_index);
  return buf;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

const json& require_field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::runtime_error("missing field '" + std::string(key) + "' in " + where);
  return *it;
}

json spindle_to_json(const SpindleSpec& s) {
  return json{{"id", s.id},
              {"diameter_mm", s.diameter_mm},
              {"lead_mm", s.lead_mm},
              {"ball_diameter_mm", s.ball_diameter_mm},
              {"dynamic_load_rating_kN", s.dynamic_load_rating_kN},
              {"pretension_class", s.pretension_class}};
}

SpindleSpec spindle_from_json(const json& j, const std::string& where) {
  SpindleSpec s;
  s.id = require_field(j, "id", where).get<std::string>();
  s.diameter_mm = require_field(j, "diameter_mm", where).get<double>();
  s.lead_mm = require_field(j, "lead_mm", where).get<double>();
  s.ball_diameter_mm = require_field(j, "ball_diameter_mm", where).get<double>();
  s.dynamic_load_rating_kN = require_field(j, "dynamic_load_rating_kN", where).get<double>();
  s.pretension_class = require_field(j, "pretension_class", where).get<std::string>();
  return s;
}

json load_to_json(const LoadSpec& l) {
  return json{{"mean_axial_load_kN", l.mean_axial_load_kN}, {"speed_rpm", l.speed_rpm}};
}

LoadSpec load_from_json(const json& j, const std::string& where) {
  LoadSpec l;
  l.mean_axial_load_kN = require_field(j, "mean_axial_load_kN", where).get<double>();
  l.speed_rpm = require_field(j, "speed_rpm", where).get<double>();
  return l;
}

json calibration_to_json(const Calibration& c) {
  return json{{"mm_per_px", c.mm_per_px},
              {"axial_axis", to_string(c.axial_axis)},
              {"angular_step_deg", c.angular_step_deg}};
}

Calibration calibration_from_json(const json& j, const std::string& where) {
  Calibration c;
  c.mm_per_px = require_field(j, "mm_per_px", where).get<double>();
  c.axial_axis = image_axis_from_string(require_field(j, "axial_axis", where).get<std::string>());
  c.angular_step_deg = require_field(j, "angular_step_deg", where).get<double>();
  return c;
}

json observation_to_json(const PitObservation& o) {
  return json{{"drive_index", o.drive_index},
              {"frame_index", o.frame.frame_index},
              {"centroid_axial_mm", o.centroid.axial_mm},
              {"centroid_tangential_mm", o.centroid.tangential_mm},
              {"axial_mm", o.axial_length_mm},
              {"tangential_mm", o.tangential_length_mm},
              {"area_mm2", o.area_mm2},
              {"pixel_count", o.pixel_count}};
}

PitObservation observation_from_json(const json& j, const Dataset& dataset,
                                     const std::string& where) {
  PitObservation o;
  o.drive_index = require_field(j, "drive_index", where).get<int>();
  int frame_index = require_field(j, "frame_index", where).get<int>();
  o.frame = dataset.frame_ref(o.drive_index, frame_index);
  o.centroid.axial_mm = require_field(j, "centroid_axial_mm", where).get<double>();
  o.centroid.tangential_mm = require_field(j, "centroid_tangential_mm", where).get<double>();
  o.axial_length_mm = require_field(j, "axial_mm", where).get<double>();
  o.tangential_length_mm = require_field(j, "tangential_mm", where).get<double>();
  o.area_mm2 = require_field(j, "area_mm2", where).get<double>();
  o.pixel_count = require_field(j, "pixel_count", where).get<std::int64_t>();
  return o;
}

json series_to_json(const AnalysisSeries& s) {
  json points = json::array();
  for (const auto& p : s.points) points.push_back(json::array({p.normalized_life, p.value}));
  return json{{"unit", s.unit}, {"points", std::move(points)}};
}

json phase_fit_to_json(const PhaseFit& f) {
  return json{{"t1", f.t1},
              {"t2", f.t2},
              {"segment_slopes", f.segment_slopes},
              {"intercept", f.intercept},
              {"sse", f.sse},
              {"single_line_sse", f.single_line_sse},
              {"distinct_phases", f.distinct_phases}};
}

}  // namespace

std::filesystem::path Dataset::drive_dir(int drive_index) const {
  return root / "drives" / drive_dir_name(drive_index);
}

std::filesystem::path Dataset::frame_path(int drive_index, int frame_index) const {
  return drive_dir(drive_index) / frame_file_name(frame_index);
}

const DriveMeta* Dataset::find_drive(int drive_index) const {
  for (const auto& d : drives)
    if (d.drive_index == drive_index) return &d;
  return nullptr;
}

FrameRef Dataset::frame_ref(int drive_index, int frame_index) const {
  FrameRef ref;
  ref.drive_index = drive_index;
  ref.frame_index = frame_index;
  ref.rotation_step_deg = std::fmod(frame_index * calibration.angular_step_deg, 360.0);
  ref.width_px = width_px;
  ref.height_px = height_px;
  return ref;
}

cv::Mat Dataset::load_frame(int drive_index, int frame_index) const {
  auto path = frame_path(drive_index, frame_index);
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw std::runtime_error("cannot read frame " + path.string());
  if (img.cols != width_px || img.rows != height_px) {
    std::ostringstream os;
    os << "frame " << path.string() << " is " << img.cols << "x" << img.rows
       << ", metadata declares " << width_px << "x" << height_px;
    throw std::runtime_error(os.str());
  }
  return img;
}

Dataset load_dataset(const std::filesystem::path& root) {
  Dataset ds;
  ds.root = root;

  auto spindle_path = root / "spindle.json";
  if (!std::filesystem::exists(spindle_path))
    throw std::runtime_error("missing " + spindle_path.string());
  json j = load_json_file(spindle_path);
  std::string where = spindle_path.string();
  ds.spindle = spindle_from_json(require_field(j, "spindle", where), where);
  ds.load = load_from_json(require_field(j, "load", where), where);
  ds.calibration = calibration_from_json(require_field(j, "calibration", where), where);
  ds.failed = require_field(j, "failed", where).get<bool>();
  ds.failure_drive = require_field(j, "failure_drive", where).get<int>();

  auto spec_check = validate_spec(ds.spindle);
  if (!spec_check.ok())
    throw std::runtime_error("invalid spindle in " + where + ": " +
                             spec_check.violations.front());
  auto cal_check = validate(ds.calibration);
  if (!cal_check.ok())
    throw std::runtime_error("invalid calibration in " + where + ": " +
                             cal_check.violations.front());

  auto drives_dir = root / "drives";
  if (!std::filesystem::is_directory(drives_dir))
    throw std::runtime_error("missing drives directory " + drives_dir.string());

  std::vector<std::filesystem::path> drive_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(drives_dir))
    if (entry.is_directory()) drive_dirs.push_back(entry.path());
  std::sort(drive_dirs.begin(), drive_dirs.end());

  for (const auto& dir : drive_dirs) {
    auto meta_path = dir / "meta.json";
    if (!std::filesystem::exists(meta_path))
      throw std::runtime_error("missing " + meta_path.string());
    json m = load_json_file(meta_path);
    std::string mwhere = meta_path.string();

    DriveMeta meta;
    meta.drive_index = require_field(m, "drive_index", mwhere).get<int>();
    meta.wall_time = require_field(m, "wall_time", mwhere).get<std::string>();
    meta.cumulative_revolutions =
        require_field(m, "cumulative_revolutions", mwhere).get<double>();
    const json& temp = require_field(m, "flange_temperature_C", mwhere);
    if (!temp.is_null()) meta.flange_temperature_C = temp.get<double>();
    meta.frame_count = require_field(m, "frame_count", mwhere).get<int>();
    int w = require_field(m, "width_px", mwhere).get<int>();
    int h = require_field(m, "height_px", mwhere).get<int>();
    if (ds.width_px == 0) {
      ds.width_px = w;
      ds.height_px = h;
    } else if (w != ds.width_px || h != ds.height_px) {
      throw std::runtime_error("inconsistent frame dimensions in " + mwhere);
    }

    for (int f = 0; f < meta.frame_count; ++f) {
      auto frame = dir / frame_file_name(f);
      if (!std::filesystem::exists(frame))
        throw std::runtime_error("missing frame " + frame.string());
    }
    ds.drives.push_back(std::move(meta));
  }

  auto order = validate_drives(ds.drives);
  if (!order.ok())
    throw std::runtime_error("invalid drive sequence under " + drives_dir.string() + ": " +
                             order.violations.front());
  if (ds.failed && !ds.find_drive(ds.failure_drive))
    throw std::runtime_error("failure_drive " + std::to_string(ds.failure_drive) +
                             " has no drive directory");
  return ds;
}

void save_dataset_metadata(const Dataset& dataset) {
  std::filesystem::create_directories(dataset.root / "drives");
  json j{{"spindle", spindle_to_json(dataset.spindle)},
         {"load", load_to_json(dataset.load)},
         {"calibration", calibration_to_json(dataset.calibration)},
         {"failed", dataset.failed},
         {"failure_drive", dataset.failure_drive}};
  write_text_file(dataset.root / "spindle.json", j.dump(2) + "\n");

  for (const auto& meta : dataset.drives) {
    auto dir = dataset.drive_dir(meta.drive_index);
    std::filesystem::create_directories(dir);
    json m{{"drive_index", meta.drive_index},
           {"wall_time", meta.wall_time},
           {"cumulative_revolutions", meta.cumulative_revolutions},
           {"flange_temperature_C",
            meta.flange_temperature_C ? json(*meta.flange_temperature_C) : json(nullptr)},
           {"frame_count", meta.frame_count},
           {"width_px", dataset.width_px},
           {"height_px", dataset.height_px}};
    write_text_file(dir / "meta.json", m.dump(2) + "\n");
  }
}

void write_observations_csv(const std::filesystem::path& path,
                            const std::vector<PitObservation>& observations) {
  std::ostringstream os;
  os << "drive_index,frame_index,centroid_axial_mm,centroid_tangential_mm,axial_mm,"
        "tangential_mm,area_mm2,pixel_count\n";
  for (const auto& o : observations) {
    os << o.drive_index << ',' << o.frame.frame_index << ',' << fmt_double(o.centroid.axial_mm)
       << ',' << fmt_double(o.centroid.tangential_mm) << ',' << fmt_double(o.axial_length_mm)
       << ',' << fmt_double(o.tangential_length_mm) << ',' << fmt_double(o.area_mm2) << ','
       << o.pixel_count << '\n';
  }
  write_text_file(path, os.str());
}

std::vector<PitObservation> read_observations_csv(const std::filesystem::path& path,
                                                  const Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv " + path.string());

  std::vector<PitObservation> observations;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<std::string, 8> fields;
    std::size_t start = 0, idx = 0;
    for (; idx < 8; ++idx) {
      auto comma = line.find(',', start);
      fields[idx] = line.substr(start, comma == std::string::npos ? comma : comma - start);
      if (comma == std::string::npos) {
        ++idx;
        break;
      }
      start = comma + 1;
    }
    if (idx != 8) throw std::runtime_error("malformed csv row in " + path.string());

    PitObservation o;
    o.drive_index = std::stoi(fields[0]);
    o.frame = dataset.frame_ref(o.drive_index, std::stoi(fields[1]));
    o.centroid.axial_mm = std::stod(fields[2]);
    o.centroid.tangential_mm = std::stod(fields[3]);
    o.axial_length_mm = std::stod(fields[4]);
    o.tangential_length_mm = std::stod(fields[5]);
    o.area_mm2 = std::stod(fields[6]);
    o.pixel_count = std::stoll(fields[7]);
    observations.push_back(o);
  }
  return observations;
}

void write_tracks_json(const std::filesystem::path& path,
                       const std::vector<PitTrack>& tracks) {
  json arr = json::array();
  std::vector<const PitTrack*> ordered;
  for (const auto& t : tracks) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const PitTrack* a, const PitTrack* b) { return a->track_id < b->track_id; });
  for (const PitTrack* t : ordered) {
    json obs = json::array();
    for (const auto& o : t->observations) obs.push_back(observation_to_json(o));
    arr.push_back(json{{"track_id", t->track_id},
                       {"birth_drive", t->birth_drive},
                       {"merged_into", t->merged_into ? json(*t->merged_into) : json(nullptr)},
                       {"merged_at_drive",
                        t->merged_at_drive ? json(*t->merged_at_drive) : json(nullptr)},
                       {"observations", std::move(obs)}});
  }
  write_text_file(path, json{{"tracks", std::move(arr)}}.dump(2) + "\n");
}

std::vector<PitTrack> read_tracks_json(const std::filesystem::path& path,
                                       const Dataset& dataset) {
  json j = load_json_file(path);
  std::string where = path.string();
  std::vector<PitTrack> tracks;
  for (const auto& tj : require_field(j, "tracks", where)) {
    PitTrack t;
    t.track_id = require_field(tj, "track_id", where).get<int>();
    t.birth_drive = require_field(tj, "birth_drive", where).get<int>();
    const json& merged = require_field(tj, "merged_into", where);
    if (!merged.is_null()) t.merged_into = merged.get<int>();
    const json& merged_at = require_field(tj, "merged_at_drive", where);
    if (!merged_at.is_null()) t.merged_at_drive = merged_at.get<int>();
    for (const auto& oj : require_field(tj, "observations", where))
      t.observations.push_back(observation_from_json(oj, dataset, where));
    tracks.push_back(std::move(t));
  }
  return tracks;
}

void write_analysis_json(const std::filesystem::path& path, const AnalysisBundle& bundle) {
  json series;
  series[bundle.count.name] = series_to_json(bundle.count);
  series[bundle.total_area.name] = series_to_json(bundle.total_area);
  for (const auto& per : bundle.per_track) {
    series[per.area.name] = series_to_json(per.area);
    series[per.axial.name] = series_to_json(per.axial);
    series[per.tangential.name] = series_to_json(per.tangential);
    series[per.approx_error.name] = series_to_json(per.approx_error);
  }

  json fits;
  if (bundle.count_fit) fits[bundle.count.name] = phase_fit_to_json(*bundle.count_fit);
  if (bundle.total_area_fit)
    fits[bundle.total_area.name] = phase_fit_to_json(*bundle.total_area_fit);

  json constants;
  for (const auto& per : bundle.per_track)
    if (per.ball_constant)
      constants[std::to_string(per.track_id)] =
          json{{"c_mm", per.ball_constant->c_mm}, {"saturated", per.ball_constant->saturated}};

  json j{{"series", std::move(series)},
         {"phase_fits", std::move(fits)},
         {"ball_constants", std::move(constants)}};
  write_text_file(path, j.dump(2) + "\n");
}

void write_series_csv(const std::filesystem::path& path, const AnalysisSeries& series) {
  std::ostringstream os;
  os << "normalized_life,value\n";
  for (const auto& p : series.points)
    os << fmt_double(p.normalized_life) << ',' << fmt_double(p.value) << '\n';
  write_text_file(path, os.str());
}

void write_eol_report_json(const std::filesystem::path& path, const EolReport& report) {
  json j{{"threshold_mm", report.threshold_mm},
         {"alpha", report.alpha},
         {"d_s_mm", report.d_s_mm},
         {"exceeded", report.exceeded},
         {"decisive_track",
          report.decisive_track ? json(*report.decisive_track) : json(nullptr)},
         {"first_exceedance_drive",
          report.first_exceedance_drive ? json(*report.first_exceedance_drive) : json(nullptr)},
         {"l10_revolutions", report.l10_revolutions},
         {"observed_over_l10",
          report.observed_over_l10 ? json(*report.observed_over_l10) : json(nullptr)},
         {"sum_tangential_mm", report.sum_tangential_mm}};
  write_text_file(path, j.dump(2) + "\n");
}

void write_ground_truth_json(const std::filesystem::path& path, const GroundTruth& truth) {
  const auto& cfg = truth.config;
  json config{{"seed", cfg.seed},
              {"texture_seed", cfg.texture_seed},
              {"n_drives", cfg.n_drives},
              {"failure_drive", cfg.failure_drive},
              {"frames_per_drive", cfg.frames_per_drive},
              {"width_px", cfg.width_px},
              {"height_px", cfg.height_px},
              {"birth_rates", cfg.birth_rates},
              {"axial_saturation_mm", cfg.axial_saturation_mm},
              {"axial_rate", cfg.axial_rate},
              {"axial_linear_mm", cfg.axial_linear_mm},
              {"tangential_base_mm", cfg.tangential_base_mm},
              {"tangential_accel", cfg.tangential_accel},
              {"birth_offset", cfg.birth_offset},
              {"param_jitter", cfg.param_jitter},
              {"min_separation_mm", cfg.min_separation_mm},
              {"noise_sigma", cfg.noise_sigma},
              {"pit_contrast", cfg.pit_contrast},
              {"boundary_roughness", cfg.boundary_roughness},
              {"drive_period_hours", cfg.drive_period_hours},
              {"spindle", spindle_to_json(cfg.spindle)},
              {"load", load_to_json(cfg.load)}};

  json pits = json::array();
  for (const auto& p : truth.pits) {
    const auto& tr = p.trajectory;
    pits.push_back(json{{"id", p.id},
                        {"t0", p.t0},
                        {"birth_drive", p.birth_drive},
                        {"centroid_axial_mm", p.centroid.axial_mm},
                        {"centroid_tangential_mm", p.centroid.tangential_mm},
                        {"trajectory",
                         json{{"t0", tr.t0},
                              {"birth_offset", tr.birth_offset},
                              {"axial_saturation_mm", tr.axial_saturation_mm},
                              {"axial_rate", tr.axial_rate},
                              {"axial_linear_mm", tr.axial_linear_mm},
                              {"tangential_base_mm", tr.tangential_base_mm},
                              {"tangential_accel", tr.tangential_accel}}}});
  }

  json j{{"config", std::move(config)},
         {"calibration", calibration_to_json(truth.calibration)},
         {"pits", std::move(pits)}};
  write_text_file(path, j.dump(2) + "\n");
}

GroundTruth read_ground_truth_json(const std::filesystem::path& path) {
  json j = load_json_file(path);
  std::string where = path.string();
  const json& cj = require_field(j, "config", where);

  GroundTruth truth;
  ScenarioConfig& cfg = truth.config;
  cfg.seed = require_field(cj, "seed", where).get<std::uint64_t>();
  cfg.texture_seed = require_field(cj, "texture_seed", where).get<std::uint64_t>();
  cfg.n_drives = require_field(cj, "n_drives", where).get<int>();
  cfg.failure_drive = require_field(cj, "failure_drive", where).get<int>();
  cfg.frames_per_drive = require_field(cj, "frames_per_drive", where).get<int>();
  cfg.width_px = require_field(cj, "width_px", where).get<int>();
  cfg.height_px = require_field(cj, "height_px", where).get<int>();
  cfg.birth_rates = require_field(cj, "birth_rates", where).get<std::array<double, 3>>();
  cfg.axial_saturation_mm = require_field(cj, "axial_saturation_mm", where).get<double>();
  cfg.axial_rate = require_field(cj, "axial_rate", where).get<double>();
  cfg.axial_linear_mm = require_field(cj, "axial_linear_mm", where).get<double>();
  cfg.tangential_base_mm = require_field(cj, "tangential_base_mm", where).get<double>();
  cfg.tangential_accel = require_field(cj, "tangential_accel", where).get<double>();
  cfg.birth_offset = require_field(cj, "birth_offset", where).get<double>();
  cfg.param_jitter = require_field(cj, "param_jitter", where).get<double>();
  cfg.min_separation_mm = require_field(cj, "min_separation_mm", where).get<double>();
  cfg.noise_sigma = require_field(cj, "noise_sigma", where).get<double>();
  cfg.pit_contrast = require_field(cj, "pit_contrast", where).get<double>();
  cfg.boundary_roughness = require_field(cj, "boundary_roughness", where).get<double>();
  cfg.drive_period_hours = require_field(cj, "drive_period_hours", where).get<double>();
  cfg.spindle = spindle_from_json(require_field(cj, "spindle", where), where);
  cfg.load = load_from_json(require_field(cj, "load", where), where);

  truth.calibration = calibration_from_json(require_field(j, "calibration", where), where);

  for (const auto& pj : require_field(j, "pits", where)) {
    GroundTruthPit p;
    p.id = require_field(pj, "id", where).get<int>();
    p.t0 = require_field(pj, "t0", where).get<double>();
    p.birth_drive = require_field(pj, "birth_drive", where).get<int>();
    p.centroid.axial_mm = require_field(pj, "centroid_axial_mm", where).get<double>();
    p.centroid.tangential_mm =
        require_field(pj, "centroid_tangential_mm", where).get<double>();
    const json& tj = require_field(pj, "trajectory", where);
    PitTrajectory& tr = p.trajectory;
    tr.t0 = require_field(tj, "t0", where).get<double>();
    tr.birth_offset = require_field(tj, "birth_offset", where).get<double>();
    tr.axial_saturation_mm = require_field(tj, "axial_saturation_mm", where).get<double>();
    tr.axial_rate = require_field(tj, "axial_rate", where).get<double>();
    tr.axial_linear_mm = require_field(tj, "axial_linear_mm", where).get<double>();
    tr.tangential_base_mm = require_field(tj, "tangential_base_mm", where).get<double>();
    tr.tangential_accel = require_field(tj, "tangential_accel", where).get<double>();
    truth.pits.push_back(p);
  }
  truth.drive_states = compute_drive_states(cfg, truth.pits);
  return truth;
}

OutputPaths write_outputs(const Dataset& dataset,
                          const std::vector<PitObservation>& observations,
                          const std::vector<PitTrack>& tracks, const AnalysisBundle& bundle,
                          const EolReport& report) {
  std::filesystem::create_directories(dataset.out_dir());
  OutputPaths paths;
  paths.observations_csv = dataset.out_dir() / "observations.csv";
  paths.tracks_json = dataset.out_dir() / "tracks.json";
  paths.analysis_json = dataset.out_dir() / "analysis.json";
  paths.eol_report_json = dataset.out_dir() / "eol_report.json";
  write_observations_csv(paths.observations_csv, observations);
  write_tracks_json(paths.tracks_json, tracks);
  write_analysis_json(paths.analysis_json, bundle);
  write_eol_report_json(paths.eol_report_json, report);
  return paths;
}

}  // namespace bsdwear
