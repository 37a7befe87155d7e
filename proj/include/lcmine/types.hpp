#pragma once

#include <map>
#include <string>
#include <vector>

#include "lcmine/error.hpp"

namespace lcmine {

using VehicleId = int;
inline constexpr VehicleId kNoVehicle = 0;
/// Lane id used for samples outside the mapped lanes (shoulders, median).
inline constexpr int kOffRoadLane = 0;

enum class DrivingDirection { dir1, dir2 };
enum class VehicleClass { car, truck };

std::string to_string(DrivingDirection d);
std::string to_string(VehicleClass c);
DrivingDirection direction_from_string(const std::string& s);
VehicleClass vehicle_class_from_string(const std::string& s);

/// One sampled state of a vehicle. Positions are in the raw dataset frame:
/// x longitudinal, y lateral, both referring to the track's datapoint
/// corner (smallest x, smallest y of the bounding box).
struct FrameSample {
  double time = 0.0;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  int lane_id = kOffRoadLane;
  VehicleId preceding_id = kNoVehicle;
  VehicleId following_id = kNoVehicle;
  VehicleId left_preceding_id = kNoVehicle;
  VehicleId left_alongside_id = kNoVehicle;
  VehicleId left_following_id = kNoVehicle;
  VehicleId right_preceding_id = kNoVehicle;
  VehicleId right_alongside_id = kNoVehicle;
  VehicleId right_following_id = kNoVehicle;
};

struct Track {
  VehicleId vehicle_id = kNoVehicle;
  VehicleClass vehicle_class = VehicleClass::car;
  double length = 0.0;          // longitudinal extent (m)
  double lateral_extent = 0.0;  // width across lanes (m)
  DrivingDirection driving_direction = DrivingDirection::dir2;
  std::vector<FrameSample> frames;

  double start_time() const { return frames.front().time; }
  double end_time() const { return frames.back().time; }
  bool covers(double t) const {
    return !frames.empty() && t >= start_time() - 1e-9 && t <= end_time() + 1e-9;
  }
  /// Index of the sample at grid time t; throws a range error when t does
  /// not land on a sample of this track.
  std::size_t index_at(double t) const;
  const FrameSample& sample_at(double t) const { return frames[index_at(t)]; }
  /// Frame spacing, from the first two samples.
  double frame_spacing() const {
    return frames.size() > 1 ? frames[1].time - frames[0].time : 0.0;
  }
};

struct LaneBounds {
  double low = 0.0;
  double high = 0.0;
};

struct LaneInfo {
  DrivingDirection direction = DrivingDirection::dir2;
  LaneBounds bounds;
};

/// Lane geometry for one recording. Raw boundary positions are the
/// dataset's lateral lane-marking values per driving direction. All
/// comparisons in the detector run in a canonical lateral frame where the
/// coordinate grows toward the outer edge of the road, so "inward" is a
/// decrease regardless of which direction a vehicle drives.
class LaneLayout {
 public:
  LaneLayout() = default;

  /// Builds the layout from per-direction marking positions. Lane ids
  /// follow the source dataset convention: dir1 lanes are numbered top to
  /// bottom starting at 2; dir2 lanes continue after a one-id gap for the
  /// median.
  static LaneLayout from_markings(std::vector<double> dir1_markings,
                                  std::vector<double> dir2_markings);

  const std::vector<double>& markings(DrivingDirection d) const {
    return d == DrivingDirection::dir1 ? dir1_markings_ : dir2_markings_;
  }
  const std::map<int, LaneInfo>& lanes() const { return lanes_; }

  bool has_lane(int id) const { return lanes_.count(id) > 0; }
  const LaneInfo& lane(int id) const;

  /// dir1 is mirrored: canonical = mirror_offset - y. dir2 is identity.
  double mirror_offset() const { return mirror_offset_; }
  void set_mirror_offset(double offset) { mirror_offset_ = offset; }

  double canonical_lateral(DrivingDirection d, double y) const {
    return d == DrivingDirection::dir1 ? mirror_offset_ - y : y;
  }
  /// Canonical position of one lane's center.
  double lane_center_canonical(int id) const;
  /// Raw boundary shared by two adjacent lanes; throws when not adjacent.
  double shared_boundary(int lane_a, int lane_b) const;
  bool adjacent(int lane_a, int lane_b) const;
  /// True when moving from `from` to `to` decreases the canonical lateral
  /// position (a change toward the inner/faster side).
  bool is_inward(int from, int to) const;
  /// Lane neighboring `id` on the driver's left (inner) side, or 0.
  int inner_neighbor(int id) const;
  int outer_neighbor(int id) const;
  /// Lane containing the raw lateral position `center_y` for direction d,
  /// or kOffRoadLane.
  int lane_at(DrivingDirection d, double center_y) const;

 private:
  std::vector<double> dir1_markings_;
  std::vector<double> dir2_markings_;
  std::map<int, LaneInfo> lanes_;
  double mirror_offset_ = 0.0;
};

struct Recording {
  int id = 0;
  double frame_rate = 0.0;
  double duration = 0.0;
  LaneLayout layout;
  std::map<VehicleId, Track> tracks;

  double dt() const { return 1.0 / frame_rate; }
  const Track* find_track(VehicleId id) const {
    auto it = tracks.find(id);
    return it == tracks.end() ? nullptr : &it->second;
  }
  const Track& track(VehicleId id) const;
};

/// Canonical longitudinal frame: positions grow in the travel direction so
/// "ahead" always means a larger value.
double canonical_front(const Track& track, const FrameSample& s);
double canonical_rear(const Track& track, const FrameSample& s);
double canonical_forward_speed(const Track& track, const FrameSample& s);

struct ValidationIssue {
  VehicleId vehicle_id = kNoVehicle;
  std::string column;
  std::size_t frame_index = 0;
  VehicleId dangling_id = kNoVehicle;
};

struct ValidationReport {
  std::vector<ValidationIssue> dangling_references;
};

/// Enforces the structural invariants (positive extents, constant frame
/// spacing, lane ids known or off-road). Dangling surrounding-vehicle ids
/// are nulled and reported rather than rejected, since recordings truncate
/// at the field of view. Throws on violations that cannot be repaired.
ValidationReport validate_recording(Recording& recording);

}  // namespace lcmine
