#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lcmine/detect.hpp"
#include "lcmine/mathutil.hpp"
#include "lcmine/mine.hpp"
#include "lcmine/synthetic.hpp"

using namespace lcmine;

namespace {

/// Four-vehicle scene around one subject on lane 6 changing to lane 5.
ScenarioScript figure_scene() {
  ScenarioScript script = lcmine::test::base_script(40.0);
  auto sv = lcmine::test::scripted_vehicle(1, 6, 100.0, 30.0);
  sv.lane_changes.push_back(ScriptedLaneChange{10.0, 5, 4.0});
  script.vehicles.push_back(sv);                                               // SV
  script.vehicles.push_back(lcmine::test::scripted_vehicle(2, 6, 160.0, 30.0));  // CLV
  script.vehicles.push_back(lcmine::test::scripted_vehicle(3, 5, 180.0, 31.0));  // TLV
  script.vehicles.push_back(lcmine::test::scripted_vehicle(4, 5, 30.0, 29.0));   // TFV
  return script;
}

/// Brute-force oracle over ground-truth events: all ordered pairs with the
/// shared lane pair, interval in (0, max], and the second subject on the
/// source lane throughout.
struct TruthPair {
  VehicleId first, second;
  double delta_t;
};

std::vector<TruthPair> brute_force_pairs(const Recording& recording,
                                         const std::vector<GroundTruthEvent>& truth,
                                         double max_interval) {
  std::vector<TruthPair> out;
  for (const auto& a : truth) {
    for (const auto& b : truth) {
      if (!a.inward || !b.inward || !a.complete || !b.complete) continue;
      if (a.vehicle_id == b.vehicle_id) continue;
      if (a.source_lane != b.source_lane || a.target_lane != b.target_lane) continue;
      // Compare at detector resolution: anchored sample times.
      const Track& ta = recording.track(a.vehicle_id);
      const Track& tb = recording.track(b.vehicle_id);
      auto anchored = [&](const GroundTruthEvent& e, const Track& t) {
        for (std::size_t k = 0; k + 1 < t.frames.size(); ++k) {
          if (t.frames[k].lane_id == e.source_lane && t.frames[k + 1].lane_id == e.target_lane &&
              std::abs(t.frames[k].time - e.t_lc) <= 2.0 * recording.dt()) {
            return t.frames[k].time;
          }
        }
        return e.t_lc;
      };
      const double ts1 = anchored(a, ta);
      const double ts2 = anchored(b, tb);
      const double delta = ts2 - ts1;
      if (!(delta > 0) || delta > max_interval) continue;
      bool stays = true;
      for (const FrameSample& s : tb.frames) {
        if (s.time < ts1 - 1e-9 || s.time > ts2 + 1e-9) continue;
        if (s.lane_id != a.source_lane) {
          stays = false;
          break;
        }
      }
      if (!tb.covers(ts1)) stays = false;
      if (!stays) continue;
      out.push_back(TruthPair{a.vehicle_id, b.vehicle_id, delta});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("four-vehicle scene resolves every group role") {
  const SyntheticResult gen = generate_synthetic(figure_scene(), 1);
  const auto events = detect_recording(gen.recording, nullptr);
  REQUIRE(events.size() == 1);
  const VehicleGroup group = build_group(gen.recording, events[0]);
  CHECK(group.sv == 1);
  CHECK(group.clv == 2);
  CHECK(group.tlv == 3);
  CHECK(group.tfv == 4);
}

TEST_CASE("a lone subject gets null neighbors") {
  ScenarioScript script = lcmine::test::base_script(40.0);
  auto sv = lcmine::test::scripted_vehicle(1, 6, 100.0, 30.0);
  sv.lane_changes.push_back(ScriptedLaneChange{10.0, 5, 4.0});
  script.vehicles.push_back(sv);
  const SyntheticResult gen = generate_synthetic(script, 1);
  const auto events = detect_recording(gen.recording, nullptr);
  REQUIRE(events.size() == 1);
  const VehicleGroup group = build_group(gen.recording, events[0]);
  CHECK(group.clv == kNoVehicle);
  CHECK(group.tlv == kNoVehicle);
  CHECK(group.tfv == kNoVehicle);
}

TEST_CASE("blanked columns fall back to the positional scan") {
  SyntheticResult gen = generate_synthetic(figure_scene(), 1);
  // Blank every surrounding-vehicle column on the subject's track.
  Track& sv = gen.recording.tracks.at(1);
  for (FrameSample& s : sv.frames) {
    s.preceding_id = kNoVehicle;
    s.left_preceding_id = kNoVehicle;
    s.left_following_id = kNoVehicle;
  }
  const auto events = detect_recording(gen.recording, nullptr);
  REQUIRE(events.size() == 1);
  const VehicleGroup group = build_group(gen.recording, events[0]);
  CHECK(group.clv == 2);
  CHECK(group.tlv == 3);
  CHECK(group.tfv == 4);
}

TEST_CASE("event for a vehicle missing from the recording is a lookup error") {
  const SyntheticResult gen = generate_synthetic(figure_scene(), 1);
  LaneChangeEvent ghost;
  ghost.vehicle_id = 99;
  ghost.t_s = ghost.t_lc = 10.0;
  ghost.t_e = 11.0;
  ghost.duration = 1.0;
  ghost.source_lane = 6;
  ghost.target_lane = 5;
  CHECK_THROWS_AS(build_group(gen.recording, ghost), Error);
}

TEST_CASE("two scripted changes 3 s apart mine into one scenario") {
  ScenarioScript script = lcmine::test::base_script(40.0);
  auto sv1 = lcmine::test::scripted_vehicle(1, 6, 120.0, 30.0);
  sv1.lane_changes.push_back(ScriptedLaneChange{5.0, 5, 4.0});
  auto sv2 = lcmine::test::scripted_vehicle(2, 6, 60.0, 30.0);
  sv2.lane_changes.push_back(ScriptedLaneChange{8.0, 5, 4.0});
  script.vehicles.push_back(sv1);
  script.vehicles.push_back(sv2);

  const SyntheticResult gen = generate_synthetic(script, 1);
  const auto events = detect_recording(gen.recording, nullptr);
  REQUIRE(events.size() == 2);
  const auto scenarios = mine_consecutive(gen.recording, events);
  REQUIRE(scenarios.size() == 1);
  CHECK(scenarios[0].v1.sv == 1);
  CHECK(scenarios[0].v2.sv == 2);
  CHECK(scenarios[0].delta_t == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("a 9.5 s interval is excluded at the default bound and included at 10 s") {
  ScenarioScript script = lcmine::test::base_script(40.0);
  auto sv1 = lcmine::test::scripted_vehicle(1, 6, 120.0, 30.0);
  sv1.lane_changes.push_back(ScriptedLaneChange{5.0, 5, 4.0});
  auto sv2 = lcmine::test::scripted_vehicle(2, 6, 60.0, 30.0);
  sv2.lane_changes.push_back(ScriptedLaneChange{14.5, 5, 4.0});
  script.vehicles.push_back(sv1);
  script.vehicles.push_back(sv2);

  const SyntheticResult gen = generate_synthetic(script, 1);
  const auto events = detect_recording(gen.recording, nullptr);
  REQUIRE(events.size() == 2);
  CHECK(mine_consecutive(gen.recording, events).empty());

  MiningOptions wide;
  wide.max_interval = 10.0;
  CHECK(mine_consecutive(gen.recording, events, wide).size() == 1);
}

TEST_CASE("a different target lane is excluded") {
  ScenarioScript script = lcmine::test::base_script(40.0);
  script.dir2_markings = {21.0, 25.0, 29.0, 33.0};  // dir2 lanes 5,6,7 here
  auto sv1 = lcmine::test::scripted_vehicle(1, 6, 120.0, 30.0);
  sv1.lane_changes.push_back(ScriptedLaneChange{5.0, 5, 4.0});
  auto sv2 = lcmine::test::scripted_vehicle(2, 7, 60.0, 30.0);
  sv2.lane_changes.push_back(ScriptedLaneChange{8.0, 6, 4.0});
  script.vehicles.push_back(sv1);
  script.vehicles.push_back(sv2);

  const SyntheticResult gen = generate_synthetic(script, 1);
  const auto events = detect_recording(gen.recording, nullptr);
  REQUIRE(events.size() == 2);
  CHECK(mine_consecutive(gen.recording, events).empty());
}

TEST_CASE("nonpositive max interval is a parameter error") {
  const SyntheticResult gen = generate_synthetic(figure_scene(), 1);
  MiningOptions bad;
  bad.max_interval = 0.0;
  CHECK_THROWS_AS(mine_consecutive(gen.recording, {}, bad), Error);
}

TEST_CASE("outward events are rejected by precondition") {
  ScenarioScript script = lcmine::test::base_script(40.0);
  auto sv = lcmine::test::scripted_vehicle(1, 5, 100.0, 30.0);
  sv.lane_changes.push_back(ScriptedLaneChange{5.0, 6, 4.0});
  script.vehicles.push_back(sv);
  const SyntheticResult gen = generate_synthetic(script, 1);
  const auto events = detect_recording(gen.recording, nullptr);
  REQUIRE(events.size() == 1);
  REQUIRE(events[0].direction == ChangeDirection::outward);
  CHECK_THROWS_AS(mine_consecutive(gen.recording, events), Error);
}

TEST_CASE("mined scenarios match the brute-force pair filter on random scenes") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Rng rng(seed * 7919);
    ScenarioScript script = lcmine::test::base_script(90.0);
    const int n = 3 + static_cast<int>(rng.next_below(3));
    for (int v = 0; v < n; ++v) {
      auto sv = lcmine::test::scripted_vehicle(v + 1, 6, 60.0 + 55.0 * v,
                                               27.0 + rng.next_double() * 5.0);
      double t = 5.0 + rng.next_double() * 10.0;
      int lane = 6;
      while (t < 75.0 && lane == 6) {
        if (rng.next_below(3) != 0) {  // not every vehicle changes
          ScriptedLaneChange change;
          change.at = t;
          change.duration = 3.0 + rng.next_double() * 2.0;
          change.to_lane = 5;
          sv.lane_changes.push_back(change);
          lane = 5;
        }
        t += 12.0 + rng.next_double() * 10.0;
      }
      script.vehicles.push_back(sv);
    }
    const SyntheticResult gen = generate_synthetic(script, seed);
    const auto events = detect_recording(gen.recording, nullptr);
    std::vector<LaneChangeEvent> inward;
    for (const auto& e : events) {
      if (e.direction == ChangeDirection::inward) inward.push_back(e);
    }
    const auto scenarios = mine_consecutive(gen.recording, inward);
    const auto expected = brute_force_pairs(gen.recording, gen.ground_truth, 9.0);

    REQUIRE(scenarios.size() == expected.size());
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
      bool found = false;
      for (const auto& pair : expected) {
        if (pair.first == scenarios[k].v1.sv && pair.second == scenarios[k].v2.sv &&
            std::abs(pair.delta_t - scenarios[k].delta_t) <= 2 * gen.recording.dt() + 1e-9) {
          found = true;
          break;
        }
      }
      CHECK_MESSAGE(found, "scenario ", k, " not in the brute-force set");
    }

    // Monotonicity: a larger bound only adds scenarios.
    MiningOptions wider;
    wider.max_interval = 14.0;
    const auto more = mine_consecutive(gen.recording, inward, wider);
    CHECK(more.size() >= scenarios.size());
    for (const auto& s : scenarios) {
      bool contained = false;
      for (const auto& m : more) {
        if (m.v1.sv == s.v1.sv && m.v2.sv == s.v2.sv &&
            m.v1.event.t_s == s.v1.event.t_s && m.v2.event.t_s == s.v2.event.t_s) {
          contained = true;
          break;
        }
      }
      CHECK(contained);
    }

    // Re-check the emitted invariants.
    for (const auto& s : scenarios) {
      CHECK(s.delta_t > 0);
      CHECK(s.delta_t <= 9.0);
      CHECK(s.v1.event.source_lane == s.v2.event.source_lane);
      CHECK(s.v1.event.target_lane == s.v2.event.target_lane);
      CHECK(s.v1.sv != s.v2.sv);
    }
  }
}

TEST_CASE("scenario csv round trip preserves groups and intervals") {
  ScenarioScript script = figure_scene();
  auto sv2 = lcmine::test::scripted_vehicle(5, 6, 40.0, 30.0);
  sv2.lane_changes.push_back(ScriptedLaneChange{14.0, 5, 4.0});
  script.vehicles.push_back(sv2);
  const SyntheticResult gen = generate_synthetic(script, 1);
  const auto events = detect_recording(gen.recording, nullptr);
  std::vector<LaneChangeEvent> inward;
  for (const auto& e : events) {
    if (e.direction == ChangeDirection::inward) inward.push_back(e);
  }
  const auto scenarios = mine_consecutive(gen.recording, inward);
  REQUIRE(!scenarios.empty());

  lcmine::test::TempDir dir("scenarios");
  write_scenarios_csv(scenarios, dir.str("scenarios.csv"));
  const auto reloaded = read_scenarios_csv(dir.str("scenarios.csv"));
  REQUIRE(reloaded.size() == scenarios.size());
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    CHECK(reloaded[k].v1.sv == scenarios[k].v1.sv);
    CHECK(reloaded[k].v2.sv == scenarios[k].v2.sv);
    CHECK(reloaded[k].v1.clv == scenarios[k].v1.clv);
    CHECK(reloaded[k].v2.tfv == scenarios[k].v2.tfv);
    CHECK(reloaded[k].delta_t == doctest::Approx(scenarios[k].delta_t).epsilon(1e-6));
    CHECK(reloaded[k].v1.event.t_e == doctest::Approx(scenarios[k].v1.event.t_e).epsilon(1e-6));
  }
}

TEST_CASE("the behind-only toggle drops pairs whose second subject leads") {
  // The second changer starts AHEAD of the first.
  ScenarioScript script = lcmine::test::base_script(40.0);
  auto sv1 = lcmine::test::scripted_vehicle(1, 6, 60.0, 30.0);
  sv1.lane_changes.push_back(ScriptedLaneChange{5.0, 5, 4.0});
  auto sv2 = lcmine::test::scripted_vehicle(2, 6, 130.0, 30.0);
  sv2.lane_changes.push_back(ScriptedLaneChange{8.0, 5, 4.0});
  script.vehicles.push_back(sv1);
  script.vehicles.push_back(sv2);

  const SyntheticResult gen = generate_synthetic(script, 1);
  const auto events = detect_recording(gen.recording, nullptr);
  REQUIRE(events.size() == 2);
  CHECK(mine_consecutive(gen.recording, events).size() == 1);

  MiningOptions behind_only;
  behind_only.require_sv2_behind_sv1 = true;
  CHECK(mine_consecutive(gen.recording, events, behind_only).empty());
}
