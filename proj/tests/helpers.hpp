#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "lcmine/synthetic.hpp"
#include "lcmine/types.hpp"

namespace lcmine::test {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("lcmine_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name = "") const {
    return name.empty() ? path_.string() : (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

/// Two-direction layout with 4 m lanes. dir1 lanes: 2 (outer), 3 (inner);
/// dir2 lanes: 5 (inner), 6 (outer).
inline LaneLayout standard_layout() {
  return LaneLayout::from_markings({8.0, 12.0, 16.0}, {21.0, 25.0, 29.0});
}

inline std::vector<double> dir1_markings() { return {8.0, 12.0, 16.0}; }
inline std::vector<double> dir2_markings() { return {21.0, 25.0, 29.0}; }

/// Straight-line dir2 track following a lane-id script at fixed speed.
/// Lateral center sits at each scripted lane's center.
inline Track track_from_lane_ids(VehicleId id, const LaneLayout& layout,
                                 const std::vector<int>& lane_ids, double frame_rate,
                                 double speed = 30.0, double width = 2.0,
                                 double length = 4.5) {
  Track track;
  track.vehicle_id = id;
  track.length = length;
  track.lateral_extent = width;
  track.driving_direction = DrivingDirection::dir2;
  const double dt = 1.0 / frame_rate;
  for (std::size_t k = 0; k < lane_ids.size(); ++k) {
    FrameSample s;
    s.time = k * dt;
    s.x = 100.0 + speed * s.time;
    const LaneBounds b = layout.lane(lane_ids[k]).bounds;
    s.y = 0.5 * (b.low + b.high) - 0.5 * width;
    s.vx = speed;
    s.lane_id = lane_ids[k];
    track.frames.push_back(s);
  }
  return track;
}

/// Base scenario script: dir2 road, one hour-glass of lanes, no jitter.
inline ScenarioScript base_script(double duration = 40.0, double frame_rate = 25.0) {
  ScenarioScript script;
  script.frame_rate = frame_rate;
  script.duration = duration;
  script.dir1_markings = dir1_markings();
  script.dir2_markings = dir2_markings();
  return script;
}

inline ScriptedVehicle scripted_vehicle(VehicleId id, int lane, double x0, double speed) {
  ScriptedVehicle v;
  v.id = id;
  v.initial_lane = lane;
  v.initial_x = x0;
  v.speed = speed;
  return v;
}

}  // namespace lcmine::test
