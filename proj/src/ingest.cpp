#include "lcmine/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>

#include "lcmine/csv.hpp"

namespace lcmine {

namespace {

const char* const kTrackColumns[] = {
    "frame", "id", "x", "y", "width", "height",
    "x_velocity", "y_velocity", "x_acceleration", "y_acceleration", "lane_id",
    "preceding_id", "following_id",
    "left_preceding_id", "left_alongside_id", "left_following_id",
    "right_preceding_id", "right_alongside_id", "right_following_id"};

std::vector<double> parse_markings(const std::string& field, const std::string& context) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= field.size()) {
    std::size_t end = field.find(';', start);
    if (end == std::string::npos) end = field.size();
    const std::string part = field.substr(start, end - start);
    if (!part.empty()) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc{} || ptr != part.data() + part.size()) {
        fail(ErrorKind::parse, context + ": unreadable lane marking value '" + part + "'");
      }
      out.push_back(v);
    }
    start = end + 1;
  }
  return out;
}

std::string mapped(const ColumnMap& map, const std::string& logical) {
  auto it = map.find(logical);
  if (it == map.end()) {
    fail(ErrorKind::schema, "column map does not resolve logical column '" + logical + "'");
  }
  return it->second;
}

}  // namespace

ColumnMap default_column_map() {
  return ColumnMap{
      {"frame", "frame"},
      {"id", "id"},
      {"x", "x"},
      {"y", "y"},
      {"width", "width"},
      {"height", "height"},
      {"x_velocity", "xVelocity"},
      {"y_velocity", "yVelocity"},
      {"x_acceleration", "xAcceleration"},
      {"y_acceleration", "yAcceleration"},
      {"lane_id", "laneId"},
      {"preceding_id", "precedingId"},
      {"following_id", "followingId"},
      {"left_preceding_id", "leftPrecedingId"},
      {"left_alongside_id", "leftAlongsideId"},
      {"left_following_id", "leftFollowingId"},
      {"right_preceding_id", "rightPrecedingId"},
      {"right_alongside_id", "rightAlongsideId"},
      {"right_following_id", "rightFollowingId"},
      // tracks-meta
      {"meta_id", "id"},
      {"meta_width", "width"},
      {"meta_height", "height"},
      {"meta_class", "class"},
      {"meta_driving_direction", "drivingDirection"},
      // recording-meta
      {"rec_id", "id"},
      {"rec_frame_rate", "frameRate"},
      {"rec_duration", "duration"},
      {"rec_upper_markings", "upperLaneMarkings"},
      {"rec_lower_markings", "lowerLaneMarkings"},
  };
}

LoadResult load_recording(const std::string& tracks_path,
                          const std::string& tracks_meta_path,
                          const std::string& recording_meta_path,
                          const LoadOptions& options) {
  const ColumnMap& cm = options.column_map;

  // Recording meta: one row with frame rate, duration and lane markings.
  CsvTable rec_meta = CsvTable::read_file(recording_meta_path);
  if (rec_meta.row_count() != 1) {
    fail(ErrorKind::schema, recording_meta_path + ": expected exactly one data row");
  }
  Recording recording;
  recording.id = static_cast<int>(rec_meta.cell_int(0, rec_meta.column(mapped(cm, "rec_id"))));
  recording.frame_rate = rec_meta.cell_double(0, rec_meta.column(mapped(cm, "rec_frame_rate")));
  recording.duration = rec_meta.cell_double(0, rec_meta.column(mapped(cm, "rec_duration")));
  if (!(recording.frame_rate > 0)) {
    fail(ErrorKind::integrity, recording_meta_path + ": frame rate must be positive");
  }
  const auto upper = parse_markings(
      rec_meta.cell(0, rec_meta.column(mapped(cm, "rec_upper_markings"))), recording_meta_path);
  const auto lower = parse_markings(
      rec_meta.cell(0, rec_meta.column(mapped(cm, "rec_lower_markings"))), recording_meta_path);
  recording.layout = LaneLayout::from_markings(upper, lower);

  // Tracks meta: static per-vehicle attributes.
  CsvTable tracks_meta = CsvTable::read_file(tracks_meta_path);
  const std::size_t tm_id = tracks_meta.column(mapped(cm, "meta_id"));
  const std::size_t tm_width = tracks_meta.column(mapped(cm, "meta_width"));
  const std::size_t tm_height = tracks_meta.column(mapped(cm, "meta_height"));
  const std::size_t tm_class = tracks_meta.column(mapped(cm, "meta_class"));
  const std::size_t tm_dir = tracks_meta.column(mapped(cm, "meta_driving_direction"));
  for (std::size_t r = 0; r < tracks_meta.row_count(); ++r) {
    Track track;
    track.vehicle_id = static_cast<VehicleId>(tracks_meta.cell_int(r, tm_id));
    track.length = tracks_meta.cell_double(r, tm_width);
    track.lateral_extent = tracks_meta.cell_double(r, tm_height);
    track.vehicle_class = vehicle_class_from_string(tracks_meta.cell(r, tm_class));
    track.driving_direction = direction_from_string(tracks_meta.cell(r, tm_dir));
    if (recording.tracks.count(track.vehicle_id)) {
      fail(ErrorKind::integrity,
           tracks_meta_path + ": duplicate vehicle id " + std::to_string(track.vehicle_id));
    }
    recording.tracks.emplace(track.vehicle_id, std::move(track));
  }

  // Per-frame samples.
  CsvTable tracks = CsvTable::read_file(tracks_path);
  std::map<std::string, std::size_t> col;
  for (const char* logical : kTrackColumns) {
    col[logical] = tracks.column(mapped(cm, logical));
  }
  const double dt = recording.dt();
  std::map<VehicleId, long long> last_frame;
  for (std::size_t r = 0; r < tracks.row_count(); ++r) {
    const auto vehicle = static_cast<VehicleId>(tracks.cell_int(r, col["id"]));
    auto it = recording.tracks.find(vehicle);
    if (it == recording.tracks.end()) {
      fail(ErrorKind::integrity,
           tracks_path + ": vehicle " + std::to_string(vehicle) + " missing from tracks meta");
    }
    const long long frame = tracks.cell_int(r, col["frame"]);
    auto [lf, inserted] = last_frame.emplace(vehicle, frame);
    if (!inserted) {
      if (frame <= lf->second) {
        fail(ErrorKind::integrity, tracks_path + ": non-monotonic frame index for vehicle " +
                                       std::to_string(vehicle) + " at row " +
                                       std::to_string(r + 2));
      }
      lf->second = frame;
    }
    FrameSample s;
    s.time = static_cast<double>(frame) * dt;
    s.x = tracks.cell_double(r, col["x"]);
    s.y = tracks.cell_double(r, col["y"]);
    s.vx = tracks.cell_double(r, col["x_velocity"]);
    s.vy = tracks.cell_double(r, col["y_velocity"]);
    s.ax = tracks.cell_double(r, col["x_acceleration"]);
    s.ay = tracks.cell_double(r, col["y_acceleration"]);
    s.lane_id = static_cast<int>(tracks.cell_int(r, col["lane_id"]));
    s.preceding_id = static_cast<VehicleId>(tracks.cell_int(r, col["preceding_id"]));
    s.following_id = static_cast<VehicleId>(tracks.cell_int(r, col["following_id"]));
    s.left_preceding_id = static_cast<VehicleId>(tracks.cell_int(r, col["left_preceding_id"]));
    s.left_alongside_id = static_cast<VehicleId>(tracks.cell_int(r, col["left_alongside_id"]));
    s.left_following_id = static_cast<VehicleId>(tracks.cell_int(r, col["left_following_id"]));
    s.right_preceding_id = static_cast<VehicleId>(tracks.cell_int(r, col["right_preceding_id"]));
    s.right_alongside_id = static_cast<VehicleId>(tracks.cell_int(r, col["right_alongside_id"]));
    s.right_following_id = static_cast<VehicleId>(tracks.cell_int(r, col["right_following_id"]));
    it->second.frames.push_back(s);
  }

  for (const auto& [id, track] : recording.tracks) {
    if (track.frames.empty()) {
      fail(ErrorKind::integrity,
           tracks_path + ": vehicle " + std::to_string(id) + " has no frames");
    }
  }

  LoadResult result;
  result.recording = std::move(recording);
  result.validation = validate_recording(result.recording);
  return result;
}

void write_recording(const Recording& recording, const std::string& tracks_path,
                     const std::string& tracks_meta_path,
                     const std::string& recording_meta_path) {
  const ColumnMap cm = default_column_map();

  {
    CsvWriter w(recording_meta_path);
    w.write_header({cm.at("rec_id"), cm.at("rec_frame_rate"), cm.at("rec_duration"),
                    cm.at("rec_upper_markings"), cm.at("rec_lower_markings")});
    auto join = [](const std::vector<double>& values) {
      std::string out;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ';';
        out += format_fixed(values[i], 2);
      }
      return out;
    };
    w.begin_row();
    w.add(recording.id);
    w.add(recording.frame_rate);
    w.add(recording.duration);
    w.add(join(recording.layout.markings(DrivingDirection::dir1)));
    w.add(join(recording.layout.markings(DrivingDirection::dir2)));
    w.end_row();
  }

  {
    CsvWriter w(tracks_meta_path);
    w.write_header({cm.at("meta_id"), cm.at("meta_width"), cm.at("meta_height"),
                    cm.at("meta_class"), cm.at("meta_driving_direction")});
    for (const auto& [id, track] : recording.tracks) {
      w.begin_row();
      w.add(id);
      w.add(track.length);
      w.add(track.lateral_extent);
      w.add(track.vehicle_class == VehicleClass::car ? "Car" : "Truck");
      w.add(track.driving_direction == DrivingDirection::dir1 ? 1 : 2);
      w.end_row();
    }
  }

  {
    CsvWriter w(tracks_path);
    std::vector<std::string> header;
    for (const char* logical : kTrackColumns) header.push_back(cm.at(logical));
    w.write_header(header);
    for (const auto& [id, track] : recording.tracks) {
      for (const FrameSample& s : track.frames) {
        w.begin_row();
        w.add(static_cast<long long>(std::llround(s.time * recording.frame_rate)));
        w.add(id);
        w.add(s.x);
        w.add(s.y);
        w.add(track.length);
        w.add(track.lateral_extent);
        w.add(s.vx);
        w.add(s.vy);
        w.add(s.ax);
        w.add(s.ay);
        w.add(s.lane_id);
        w.add(s.preceding_id);
        w.add(s.following_id);
        w.add(s.left_preceding_id);
        w.add(s.left_alongside_id);
        w.add(s.left_following_id);
        w.add(s.right_preceding_id);
        w.add(s.right_alongside_id);
        w.add(s.right_following_id);
        w.end_row();
      }
    }
  }
}

void write_recording_dir(const Recording& recording, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_recording(recording, (base / "tracks.csv").string(),
                  (base / "tracksMeta.csv").string(),
                  (base / "recordingMeta.csv").string());
}

RecordingPaths locate_recording(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    fail(ErrorKind::io, dir + " is not a directory");
  }
  RecordingPaths paths;
  auto ends_with = [](const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (ends_with(name, "tracksMeta.csv")) {
      paths.tracks_meta = entry.path().string();
    } else if (ends_with(name, "recordingMeta.csv")) {
      paths.recording_meta = entry.path().string();
    } else if (ends_with(name, "tracks.csv")) {
      paths.tracks = entry.path().string();
    }
  }
  if (paths.tracks.empty() || paths.tracks_meta.empty() || paths.recording_meta.empty()) {
    fail(ErrorKind::io, dir + ": expected tracks.csv, tracksMeta.csv and recordingMeta.csv");
  }
  return paths;
}

}  // namespace lcmine
