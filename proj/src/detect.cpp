#include "lcmine/detect.hpp"

#include <algorithm>
#include <limits>

#include "lcmine/csv.hpp"

namespace lcmine {

std::string to_string(ChangeDirection d) {
  return d == ChangeDirection::inward ? "inward" : "outward";
}

ChangeDirection change_direction_from_string(const std::string& s) {
  if (s == "inward") return ChangeDirection::inward;
  if (s == "outward") return ChangeDirection::outward;
  fail(ErrorKind::parse, "unknown change direction '" + s + "'");
}

std::vector<SwitchInstant> lane_switch_instants(const Track& track) {
  if (track.frames.size() < 2) {
    fail(ErrorKind::precondition, "vehicle " + std::to_string(track.vehicle_id) +
                                      ": need at least 2 frames to scan for switches");
  }
  std::vector<SwitchInstant> instants;
  for (std::size_t k = 0; k + 1 < track.frames.size(); ++k) {
    const int from = track.frames[k].lane_id;
    const int to = track.frames[k + 1].lane_id;
    if (from == to) continue;
    if (from == kOffRoadLane || to == kOffRoadLane) continue;
    instants.push_back(SwitchInstant{track.frames[k].time, from, to});
  }
  return instants;
}

namespace {

double canonical_edges(const Track& track, const LaneLayout& layout, double t, bool outer) {
  const FrameSample& s = track.sample_at(t);
  const double a = layout.canonical_lateral(track.driving_direction, s.y);
  const double b =
      layout.canonical_lateral(track.driving_direction, s.y + track.lateral_extent);
  return outer ? std::max(a, b) : std::min(a, b);
}

}  // namespace

double lateral_edge_position(const Track& track, const LaneLayout& layout, double t) {
  return canonical_edges(track, layout, t, /*outer=*/true);
}

double lateral_inner_edge_position(const Track& track, const LaneLayout& layout, double t) {
  return canonical_edges(track, layout, t, /*outer=*/false);
}

std::vector<LaneChangeEvent> detect_events(const Track& track, const LaneLayout& layout,
                                           DetectionDiagnostics* diagnostics) {
  DetectionDiagnostics local;
  DetectionDiagnostics& diag = diagnostics ? *diagnostics : local;

  std::vector<LaneChangeEvent> events;
  if (track.frames.size() < 2) return events;

  const DrivingDirection d = track.driving_direction;
  double previous_t_e = -std::numeric_limits<double>::infinity();

  for (const SwitchInstant& instant : lane_switch_instants(track)) {
    if (!layout.has_lane(instant.source_lane) || !layout.has_lane(instant.target_lane)) {
      fail(ErrorKind::precondition,
           "layout does not cover lane ids of vehicle " + std::to_string(track.vehicle_id));
    }
    if (!layout.adjacent(instant.source_lane, instant.target_lane)) {
      // A jump across more than one boundary between consecutive samples
      // cannot be split per boundary; count and drop.
      ++diag.discarded_sweep;
      continue;
    }
    const bool inward = layout.is_inward(instant.source_lane, instant.target_lane);
    const double boundary_raw = layout.shared_boundary(instant.source_lane, instant.target_lane);
    const double boundary = layout.canonical_lateral(d, boundary_raw);

    // First sample strictly after t_lc whose trailing edge has crossed.
    const std::size_t anchor = track.index_at(instant.t_lc);
    double t_e = -1.0;
    for (std::size_t k = anchor + 1; k < track.frames.size(); ++k) {
      const FrameSample& s = track.frames[k];
      const double lo = layout.canonical_lateral(d, s.y);
      const double hi = layout.canonical_lateral(d, s.y + track.lateral_extent);
      const double edge = inward ? std::max(lo, hi) : std::min(lo, hi);
      const bool crossed = inward ? edge < boundary : edge > boundary;
      if (crossed) {
        t_e = s.time;
        break;
      }
    }
    if (t_e < 0) {
      ++diag.discarded_incomplete;
      continue;
    }

    LaneChangeEvent event;
    event.vehicle_id = track.vehicle_id;
    event.t_lc = instant.t_lc;
    event.t_s = instant.t_lc;
    event.t_e = t_e;
    event.duration = t_e - instant.t_lc;
    event.source_lane = instant.source_lane;
    event.target_lane = instant.target_lane;
    event.direction = inward ? ChangeDirection::inward : ChangeDirection::outward;
    if (event.t_s < previous_t_e) ++diag.overlapping;
    previous_t_e = std::max(previous_t_e, event.t_e);
    events.push_back(event);
  }
  return events;
}

std::vector<LaneChangeEvent> detect_recording(const Recording& recording,
                                              DetectionDiagnostics* diagnostics) {
  std::vector<LaneChangeEvent> all;
  for (const auto& [id, track] : recording.tracks) {
    if (track.frames.size() < 2) continue;
    auto events = detect_events(track, recording.layout, diagnostics);
    all.insert(all.end(), events.begin(), events.end());
  }
  return all;
}

void write_events_csv(const std::vector<LaneChangeEvent>& events, const std::string& path) {
  CsvWriter w(path);
  w.write_header({"vehicle_id", "t_lc", "t_s", "t_e", "T_LC", "source_lane", "target_lane",
                  "direction"});
  for (const LaneChangeEvent& e : events) {
    w.begin_row();
    w.add(e.vehicle_id);
    w.add(e.t_lc);
    w.add(e.t_s);
    w.add(e.t_e);
    w.add(e.duration);
    w.add(e.source_lane);
    w.add(e.target_lane);
    w.add(to_string(e.direction));
    w.end_row();
  }
}

std::vector<LaneChangeEvent> read_events_csv(const std::string& path) {
  CsvTable table = CsvTable::read_file(path);
  const std::size_t c_vehicle = table.column("vehicle_id");
  const std::size_t c_tlc = table.column("t_lc");
  const std::size_t c_ts = table.column("t_s");
  const std::size_t c_te = table.column("t_e");
  const std::size_t c_dur = table.column("T_LC");
  const std::size_t c_src = table.column("source_lane");
  const std::size_t c_tgt = table.column("target_lane");
  const std::size_t c_dir = table.column("direction");
  std::vector<LaneChangeEvent> events;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    LaneChangeEvent e;
    e.vehicle_id = static_cast<VehicleId>(table.cell_int(r, c_vehicle));
    e.t_lc = table.cell_double(r, c_tlc);
    e.t_s = table.cell_double(r, c_ts);
    e.t_e = table.cell_double(r, c_te);
    e.duration = table.cell_double(r, c_dur);
    e.source_lane = static_cast<int>(table.cell_int(r, c_src));
    e.target_lane = static_cast<int>(table.cell_int(r, c_tgt));
    e.direction = change_direction_from_string(table.cell(r, c_dir));
    events.push_back(e);
  }
  return events;
}

}  // namespace lcmine
