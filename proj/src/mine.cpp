#include "lcmine/mine.hpp"

#include <algorithm>
#include <cmath>

#include "lcmine/csv.hpp"

namespace lcmine {

namespace {

/// Nearest vehicle in `lane` that is fully ahead of (or behind) the
/// subject at time t, by bumper gap. Returns null when none qualifies.
VehicleId positional_neighbor(const Recording& recording, const Track& subject,
                              const FrameSample& subject_sample, int lane, bool ahead) {
  const double front = canonical_front(subject, subject_sample);
  const double rear = canonical_rear(subject, subject_sample);
  VehicleId best = kNoVehicle;
  double best_gap = 0.0;
  for (const auto& [id, other] : recording.tracks) {
    if (id == subject.vehicle_id) continue;
    if (other.driving_direction != subject.driving_direction) continue;
    if (!other.covers(subject_sample.time)) continue;
    const FrameSample& os = other.sample_at(subject_sample.time);
    if (os.lane_id != lane) continue;
    const double o_front = canonical_front(other, os);
    const double o_rear = canonical_rear(other, os);
    double gap;
    if (ahead) {
      if (o_rear < front) continue;
      gap = o_rear - front;
    } else {
      if (o_front > rear) continue;
      gap = rear - o_front;
    }
    if (best == kNoVehicle || gap < best_gap) {
      best = id;
      best_gap = gap;
    }
  }
  return best;
}

}  // namespace

VehicleGroup build_group(const Recording& recording, const LaneChangeEvent& event) {
  const Track* subject = recording.find_track(event.vehicle_id);
  if (!subject) {
    fail(ErrorKind::parameter,
         "event vehicle " + std::to_string(event.vehicle_id) + " absent from recording");
  }
  const FrameSample& s = subject->sample_at(event.t_s);

  VehicleGroup group;
  group.event = event;
  group.sv = event.vehicle_id;

  // At t_s the subject is still on the source lane, so the dataset's
  // preceding column is the current-lane leader. The target lane sits on
  // the driver's left for inward changes, right for outward.
  const bool inward = event.direction == ChangeDirection::inward;
  const VehicleId col_clv = s.preceding_id;
  const VehicleId col_tlv = inward ? s.left_preceding_id : s.right_preceding_id;
  const VehicleId col_tfv = inward ? s.left_following_id : s.right_following_id;

  group.clv = col_clv != kNoVehicle
                  ? col_clv
                  : positional_neighbor(recording, *subject, s, event.source_lane, true);
  group.tlv = col_tlv != kNoVehicle
                  ? col_tlv
                  : positional_neighbor(recording, *subject, s, event.target_lane, true);
  group.tfv = col_tfv != kNoVehicle
                  ? col_tfv
                  : positional_neighbor(recording, *subject, s, event.target_lane, false);
  return group;
}

std::vector<ConsecutiveScenario> mine_consecutive(const Recording& recording,
                                                  const std::vector<LaneChangeEvent>& events,
                                                  const MiningOptions& options) {
  if (!(options.max_interval > 0)) {
    fail(ErrorKind::parameter, "max_interval must be positive");
  }
  for (const LaneChangeEvent& e : events) {
    if (e.direction != ChangeDirection::inward) {
      fail(ErrorKind::precondition, "mine_consecutive expects inward events only");
    }
  }

  std::vector<LaneChangeEvent> sorted = events;
  std::sort(sorted.begin(), sorted.end(), [](const LaneChangeEvent& a, const LaneChangeEvent& b) {
    if (a.t_s != b.t_s) return a.t_s < b.t_s;
    return a.vehicle_id < b.vehicle_id;
  });

  std::vector<ConsecutiveScenario> scenarios;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      const LaneChangeEvent& first = sorted[i];
      const LaneChangeEvent& second = sorted[j];
      if (first.vehicle_id == second.vehicle_id) continue;
      if (first.source_lane != second.source_lane || first.target_lane != second.target_lane) {
        continue;
      }
      const double delta_t = second.t_s - first.t_s;
      if (!(delta_t > 0.0) || delta_t > options.max_interval) continue;

      // The second subject must be driving in the shared source lane for
      // the whole interval between the two start instants.
      const Track& sv2 = recording.track(second.vehicle_id);
      bool stays_in_lane = true;
      for (const FrameSample& sample : sv2.frames) {
        if (sample.time < first.t_s - 1e-9) continue;
        if (sample.time > second.t_s + 1e-9) break;
        if (sample.lane_id != first.source_lane) {
          stays_in_lane = false;
          break;
        }
      }
      if (!stays_in_lane) continue;
      if (!sv2.covers(first.t_s)) continue;

      if (options.require_sv2_behind_sv1) {
        const Track& sv1 = recording.track(first.vehicle_id);
        if (!sv1.covers(first.t_s)) continue;
        const double front1 = canonical_front(sv1, sv1.sample_at(first.t_s));
        const double front2 = canonical_front(sv2, sv2.sample_at(first.t_s));
        if (!(front2 < front1)) continue;
      }

      ConsecutiveScenario scenario;
      scenario.v1 = build_group(recording, first);
      scenario.v2 = build_group(recording, second);
      scenario.delta_t = delta_t;
      scenarios.push_back(scenario);
    }
  }

  std::sort(scenarios.begin(), scenarios.end(),
            [](const ConsecutiveScenario& a, const ConsecutiveScenario& b) {
              if (a.v1.event.t_s != b.v1.event.t_s) return a.v1.event.t_s < b.v1.event.t_s;
              return a.v2.event.t_s < b.v2.event.t_s;
            });
  return scenarios;
}

namespace {

void write_group_cells(CsvWriter& w, const VehicleGroup& g) {
  w.add(g.sv);
  w.add(g.event.t_s);
  w.add(g.event.t_e);
  w.add(g.clv);
  w.add(g.tlv);
  w.add(g.tfv);
}

}  // namespace

void write_scenarios_csv(const std::vector<ConsecutiveScenario>& scenarios,
                         const std::string& path) {
  CsvWriter w(path);
  w.write_header({"source_lane", "target_lane", "sv1", "t_s1", "t_e1", "clv1", "tlv1", "tfv1",
                  "sv2", "t_s2", "t_e2", "clv2", "tlv2", "tfv2", "delta_t"});
  for (const ConsecutiveScenario& s : scenarios) {
    w.begin_row();
    w.add(s.v1.event.source_lane);
    w.add(s.v1.event.target_lane);
    write_group_cells(w, s.v1);
    write_group_cells(w, s.v2);
    w.add(s.delta_t);
    w.end_row();
  }
}

std::vector<ConsecutiveScenario> read_scenarios_csv(const std::string& path) {
  CsvTable t = CsvTable::read_file(path);
  auto group_from = [&](std::size_t row, const std::string& suffix, int source, int target) {
    VehicleGroup g;
    g.sv = static_cast<VehicleId>(t.cell_int(row, t.column("sv" + suffix)));
    g.clv = static_cast<VehicleId>(t.cell_int(row, t.column("clv" + suffix)));
    g.tlv = static_cast<VehicleId>(t.cell_int(row, t.column("tlv" + suffix)));
    g.tfv = static_cast<VehicleId>(t.cell_int(row, t.column("tfv" + suffix)));
    g.event.vehicle_id = g.sv;
    g.event.t_s = t.cell_double(row, t.column("t_s" + suffix));
    g.event.t_lc = g.event.t_s;
    g.event.t_e = t.cell_double(row, t.column("t_e" + suffix));
    g.event.duration = g.event.t_e - g.event.t_s;
    g.event.source_lane = source;
    g.event.target_lane = target;
    g.event.direction = ChangeDirection::inward;
    return g;
  };
  std::vector<ConsecutiveScenario> scenarios;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    const int source = static_cast<int>(t.cell_int(r, t.column("source_lane")));
    const int target = static_cast<int>(t.cell_int(r, t.column("target_lane")));
    ConsecutiveScenario s;
    s.v1 = group_from(r, "1", source, target);
    s.v2 = group_from(r, "2", source, target);
    s.delta_t = t.cell_double(r, t.column("delta_t"));
    scenarios.push_back(s);
  }
  return scenarios;
}

}  // namespace lcmine
