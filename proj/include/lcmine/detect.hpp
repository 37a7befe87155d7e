#pragma once

#include <string>
#include <vector>

#include "lcmine/types.hpp"

namespace lcmine {

enum class ChangeDirection { inward, outward };

std::string to_string(ChangeDirection d);
ChangeDirection change_direction_from_string(const std::string& s);

struct LaneChangeEvent {
  VehicleId vehicle_id = kNoVehicle;
  double t_lc = 0.0;
  double t_s = 0.0;
  double t_e = 0.0;
  double duration = 0.0;  // T_LC = t_e - t_s
  int source_lane = 0;
  int target_lane = 0;
  ChangeDirection direction = ChangeDirection::inward;
};

struct SwitchInstant {
  double t_lc = 0.0;
  int source_lane = 0;
  int target_lane = 0;
};

struct DetectionDiagnostics {
  int discarded_incomplete = 0;  // track ended before the edge crossed
  int discarded_sweep = 0;       // lane id jumped across a non-adjacent pair
  int overlapping = 0;           // change started before the previous completed
};

/// Every instant where the lane id switches, anchored at the last sample on
/// the old lane, in time order. Off-road transitions are not switches.
std::vector<SwitchInstant> lane_switch_instants(const Track& track);

/// Canonical lateral position of the vehicle's outer edge at grid time t —
/// the edge that crosses the shared boundary last during an inward change.
double lateral_edge_position(const Track& track, const LaneLayout& layout, double t);

/// Canonical lateral position of the inner edge (the trailing edge of an
/// outward change).
double lateral_inner_edge_position(const Track& track, const LaneLayout& layout, double t);

/// Detects lane-change events for one track: the start is the switch
/// instant, the end is the first later sample whose trailing edge has
/// passed the crossed boundary (strict comparison). Inward events feed the
/// downstream mining; outward events are reported for diagnostics.
std::vector<LaneChangeEvent> detect_events(const Track& track, const LaneLayout& layout,
                                           DetectionDiagnostics* diagnostics = nullptr);

/// All tracks of a recording, merged in vehicle-id order.
std::vector<LaneChangeEvent> detect_recording(const Recording& recording,
                                              DetectionDiagnostics* diagnostics = nullptr);

void write_events_csv(const std::vector<LaneChangeEvent>& events, const std::string& path);
std::vector<LaneChangeEvent> read_events_csv(const std::string& path);

}  // namespace lcmine
