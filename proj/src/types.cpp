#include "lcmine/types.hpp"

#include <algorithm>
#include <cmath>

namespace lcmine {

std::string to_string(DrivingDirection d) {
  return d == DrivingDirection::dir1 ? "dir1" : "dir2";
}

std::string to_string(VehicleClass c) {
  return c == VehicleClass::car ? "car" : "truck";
}

DrivingDirection direction_from_string(const std::string& s) {
  if (s == "dir1" || s == "1") return DrivingDirection::dir1;
  if (s == "dir2" || s == "2") return DrivingDirection::dir2;
  fail(ErrorKind::parse, "unknown driving direction '" + s + "'");
}

VehicleClass vehicle_class_from_string(const std::string& s) {
  std::string lower;
  for (char ch : s) lower.push_back(static_cast<char>(std::tolower(ch)));
  if (lower == "car") return VehicleClass::car;
  if (lower == "truck") return VehicleClass::truck;
  fail(ErrorKind::parse, "unknown vehicle class '" + s + "'");
}

std::size_t Track::index_at(double t) const {
  if (frames.empty()) fail(ErrorKind::range, "track has no frames");
  const double dt = frame_spacing();
  if (dt <= 0.0) {
    if (std::abs(frames.front().time - t) < 1e-9) return 0;
    fail(ErrorKind::range, "time " + std::to_string(t) + " outside track span of vehicle " +
                               std::to_string(vehicle_id));
  }
  const double offset = (t - frames.front().time) / dt;
  const long long idx = std::llround(offset);
  if (idx < 0 || idx >= static_cast<long long>(frames.size())) {
    fail(ErrorKind::range, "time " + std::to_string(t) + " outside track span of vehicle " +
                               std::to_string(vehicle_id));
  }
  const auto i = static_cast<std::size_t>(idx);
  if (std::abs(frames[i].time - t) > dt * 0.5) {
    fail(ErrorKind::range, "time " + std::to_string(t) + " not on the sample grid of vehicle " +
                               std::to_string(vehicle_id));
  }
  return i;
}

LaneLayout LaneLayout::from_markings(std::vector<double> dir1_markings,
                                     std::vector<double> dir2_markings) {
  LaneLayout layout;
  auto check_monotonic = [](const std::vector<double>& m, const char* which) {
    for (std::size_t i = 1; i < m.size(); ++i) {
      if (!(m[i] > m[i - 1])) {
        fail(ErrorKind::integrity,
             std::string("lane markings for ") + which + " not strictly increasing");
      }
    }
  };
  check_monotonic(dir1_markings, "dir1");
  check_monotonic(dir2_markings, "dir2");

  layout.dir1_markings_ = std::move(dir1_markings);
  layout.dir2_markings_ = std::move(dir2_markings);

  const auto& m1 = layout.dir1_markings_;
  const auto& m2 = layout.dir2_markings_;
  // dir1 lanes occupy ids 2..(1 + n1); one id is skipped for the median,
  // then dir2 lanes continue. Matches the drone-recording convention where
  // id 1 is the area above the road.
  int next_id = 2;
  for (std::size_t i = 0; i + 1 < m1.size(); ++i) {
    layout.lanes_[next_id++] = LaneInfo{DrivingDirection::dir1, {m1[i], m1[i + 1]}};
  }
  ++next_id;
  for (std::size_t i = 0; i + 1 < m2.size(); ++i) {
    layout.lanes_[next_id++] = LaneInfo{DrivingDirection::dir2, {m2[i], m2[i + 1]}};
  }

  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& m : {m1, m2}) {
    for (double v : m) {
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  layout.mirror_offset_ = first ? 0.0 : lo + hi;
  return layout;
}

const LaneInfo& LaneLayout::lane(int id) const {
  auto it = lanes_.find(id);
  if (it == lanes_.end()) {
    fail(ErrorKind::parameter, "unknown lane id " + std::to_string(id));
  }
  return it->second;
}

double LaneLayout::lane_center_canonical(int id) const {
  const LaneInfo& info = lane(id);
  return canonical_lateral(info.direction, 0.5 * (info.bounds.low + info.bounds.high));
}

bool LaneLayout::adjacent(int lane_a, int lane_b) const {
  if (!has_lane(lane_a) || !has_lane(lane_b) || lane_a == lane_b) return false;
  const LaneInfo& a = lane(lane_a);
  const LaneInfo& b = lane(lane_b);
  if (a.direction != b.direction) return false;
  const double eps = 1e-9;
  return std::abs(a.bounds.high - b.bounds.low) < eps ||
         std::abs(b.bounds.high - a.bounds.low) < eps;
}

double LaneLayout::shared_boundary(int lane_a, int lane_b) const {
  const LaneInfo& a = lane(lane_a);
  const LaneInfo& b = lane(lane_b);
  const double eps = 1e-9;
  if (a.direction == b.direction) {
    if (std::abs(a.bounds.high - b.bounds.low) < eps) return a.bounds.high;
    if (std::abs(b.bounds.high - a.bounds.low) < eps) return a.bounds.low;
  }
  fail(ErrorKind::parameter, "lanes " + std::to_string(lane_a) + " and " +
                                 std::to_string(lane_b) + " are not adjacent");
}

bool LaneLayout::is_inward(int from, int to) const {
  return lane_center_canonical(to) < lane_center_canonical(from);
}

int LaneLayout::inner_neighbor(int id) const {
  const LaneInfo& info = lane(id);
  int best = kOffRoadLane;
  for (const auto& [other_id, other] : lanes_) {
    if (other_id == id || other.direction != info.direction) continue;
    if (!adjacent(id, other_id)) continue;
    if (lane_center_canonical(other_id) < lane_center_canonical(id)) best = other_id;
  }
  return best;
}

int LaneLayout::outer_neighbor(int id) const {
  const LaneInfo& info = lane(id);
  int best = kOffRoadLane;
  for (const auto& [other_id, other] : lanes_) {
    if (other_id == id || other.direction != info.direction) continue;
    if (!adjacent(id, other_id)) continue;
    if (lane_center_canonical(other_id) > lane_center_canonical(id)) best = other_id;
  }
  return best;
}

int LaneLayout::lane_at(DrivingDirection d, double center_y) const {
  for (const auto& [id, info] : lanes_) {
    if (info.direction != d) continue;
    if (center_y >= info.bounds.low && center_y < info.bounds.high) return id;
  }
  return kOffRoadLane;
}

const Track& Recording::track(VehicleId id) const {
  const Track* t = find_track(id);
  if (!t) fail(ErrorKind::parameter, "vehicle " + std::to_string(id) + " not in recording");
  return *t;
}

double canonical_front(const Track& track, const FrameSample& s) {
  return track.driving_direction == DrivingDirection::dir1 ? -s.x : s.x + track.length;
}

double canonical_rear(const Track& track, const FrameSample& s) {
  return track.driving_direction == DrivingDirection::dir1 ? -(s.x + track.length) : s.x;
}

double canonical_forward_speed(const Track& track, const FrameSample& s) {
  return track.driving_direction == DrivingDirection::dir1 ? -s.vx : s.vx;
}

ValidationReport validate_recording(Recording& recording) {
  if (!(recording.frame_rate > 0)) {
    fail(ErrorKind::integrity, "frame rate must be positive");
  }
  ValidationReport report;
  const double dt = recording.dt();
  const double max_time = recording.duration + dt;  // allow boundary frame

  for (auto& [id, track] : recording.tracks) {
    if (track.vehicle_id != id) {
      fail(ErrorKind::integrity, "track key/id mismatch for vehicle " + std::to_string(id));
    }
    if (!(track.length > 0) || !(track.lateral_extent > 0)) {
      fail(ErrorKind::integrity,
           "vehicle " + std::to_string(id) + ": length and lateral extent must be positive");
    }
    if (track.frames.empty()) {
      fail(ErrorKind::integrity, "vehicle " + std::to_string(id) + " has no frames");
    }
    for (std::size_t k = 0; k < track.frames.size(); ++k) {
      const FrameSample& s = track.frames[k];
      if (s.time < -1e-9 || s.time > max_time + 1e-9) {
        fail(ErrorKind::integrity, "vehicle " + std::to_string(id) + ": frame time " +
                                       std::to_string(s.time) + " outside recording span");
      }
      if (k > 0) {
        const double step = s.time - track.frames[k - 1].time;
        if (step <= 0) {
          fail(ErrorKind::integrity,
               "vehicle " + std::to_string(id) + ": non-monotonic frame index at sample " +
                   std::to_string(k));
        }
        if (std::abs(step - dt) > dt * 1e-6) {
          fail(ErrorKind::integrity,
               "vehicle " + std::to_string(id) + ": frame spacing " + std::to_string(step) +
                   " differs from 1/frame_rate");
        }
      }
      if (s.lane_id != kOffRoadLane && !recording.layout.has_lane(s.lane_id)) {
        // Unknown lane ids are legal off-road sentinels; normalize them.
        track.frames[k].lane_id = kOffRoadLane;
      }
    }
  }

  // Surrounding-vehicle references: null the dangling ones, keep a report.
  struct ColumnRef {
    const char* name;
    VehicleId FrameSample::* member;
  };
  static const ColumnRef kRefs[] = {
      {"preceding_id", &FrameSample::preceding_id},
      {"following_id", &FrameSample::following_id},
      {"left_preceding_id", &FrameSample::left_preceding_id},
      {"left_alongside_id", &FrameSample::left_alongside_id},
      {"left_following_id", &FrameSample::left_following_id},
      {"right_preceding_id", &FrameSample::right_preceding_id},
      {"right_alongside_id", &FrameSample::right_alongside_id},
      {"right_following_id", &FrameSample::right_following_id},
  };
  for (auto& [id, track] : recording.tracks) {
    for (std::size_t k = 0; k < track.frames.size(); ++k) {
      for (const auto& ref : kRefs) {
        VehicleId& value = track.frames[k].*ref.member;
        if (value != kNoVehicle && recording.tracks.count(value) == 0) {
          report.dangling_references.push_back(
              ValidationIssue{id, ref.name, k, value});
          value = kNoVehicle;
        }
      }
    }
  }
  return report;
}

}  // namespace lcmine
