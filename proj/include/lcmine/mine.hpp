#pragma once

#include <string>
#include <vector>

#include "lcmine/detect.hpp"
#include "lcmine/types.hpp"

namespace lcmine {

/// Four-vehicle group around one lane-changing subject: leader in the
/// current lane, leader and follower in the target lane. Roles are
/// resolved at the event's start instant; absent neighbors stay null.
struct VehicleGroup {
  LaneChangeEvent event;
  VehicleId sv = kNoVehicle;
  VehicleId clv = kNoVehicle;
  VehicleId tlv = kNoVehicle;
  VehicleId tfv = kNoVehicle;
};

struct ConsecutiveScenario {
  VehicleGroup v1;
  VehicleGroup v2;
  double delta_t = 0.0;  // t_s2 - t_s1
};

struct MiningOptions {
  double max_interval = 9.0;
  /// Optional extra filter: the second subject must be longitudinally
  /// behind the first at the first start instant.
  bool require_sv2_behind_sv1 = false;
};

/// Resolves the group roles for one event, preferring the recording's
/// surrounding-vehicle columns and falling back to a positional scan when
/// a column is null.
VehicleGroup build_group(const Recording& recording, const LaneChangeEvent& event);

/// Mines ordered pairs of inward events sharing (source, target) lanes
/// with 0 < delta_t <= max_interval, where the second subject stays on the
/// shared source lane throughout [t_s1, t_s2]. Output sorted by
/// (t_s1, t_s2).
std::vector<ConsecutiveScenario> mine_consecutive(const Recording& recording,
                                                  const std::vector<LaneChangeEvent>& events,
                                                  const MiningOptions& options = {});

void write_scenarios_csv(const std::vector<ConsecutiveScenario>& scenarios,
                         const std::string& path);
std::vector<ConsecutiveScenario> read_scenarios_csv(const std::string& path);

}  // namespace lcmine
