#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcmine/types.hpp"

namespace lcmine {

struct SpeedKnot {
  double time = 0.0;
  double speed = 0.0;  // forward speed, m/s
};

/// One scripted maneuver. `at` is the nominal lane-switch instant: the
/// lateral profile moves the vehicle center sinusoidally between lane
/// centers over [at - duration/2, at + duration/2], so with equal lane
/// widths the center crosses the shared boundary exactly at `at`.
struct ScriptedLaneChange {
  double at = 0.0;
  int to_lane = 0;
  double duration = 0.0;
};

struct ScriptedVehicle {
  VehicleId id = 0;
  VehicleClass vehicle_class = VehicleClass::car;
  double length = 4.5;
  double width = 2.0;
  DrivingDirection direction = DrivingDirection::dir2;
  double enter = 0.0;
  double exit = -1.0;  // -1: until the end of the recording
  int initial_lane = 0;
  double initial_x = 0.0;  // raw datapoint position at `enter`
  double speed = 30.0;     // forward speed at `enter`
  std::vector<SpeedKnot> speed_profile;  // piecewise-linear knots after `enter`
  std::vector<ScriptedLaneChange> lane_changes;
};

struct ScenarioScript {
  int recording_id = 1;
  double frame_rate = 25.0;
  double duration = 0.0;
  std::vector<double> dir1_markings;
  std::vector<double> dir2_markings;
  double lateral_jitter_sd = 0.0;  // per-frame noise on the lateral center
  double speed_jitter_sd = 0.0;    // per-frame noise on the recorded velocity
  std::vector<ScriptedVehicle> vehicles;
};

/// Continuous-time ground truth for one scripted change. `t_e` is the
/// instant the trailing edge crosses the shared boundary; `complete` is
/// false when that instant falls outside the vehicle's sampled span.
struct GroundTruthEvent {
  VehicleId vehicle_id = 0;
  double t_lc = 0.0;
  double t_e = 0.0;
  int source_lane = 0;
  int target_lane = 0;
  bool inward = true;
  bool complete = true;
};

struct SyntheticResult {
  Recording recording;
  std::vector<GroundTruthEvent> ground_truth;
};

ScenarioScript load_script(const std::string& path);
ScenarioScript parse_script(const std::string& json_text);

/// Deterministic for a given (script, seed); the seed only drives the
/// optional jitter terms.
SyntheticResult generate_synthetic(const ScenarioScript& script, std::uint64_t seed);

}  // namespace lcmine
