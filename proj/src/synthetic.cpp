#include "lcmine/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lcmine/mathutil.hpp"

namespace lcmine {

namespace {

using nlohmann::json;

// Sinusoidal blend: smooth, monotone, zero slope at both ends.
double blend(double tau) { return 0.5 * (1.0 - std::cos(M_PI * tau)); }
double blend_rate(double tau) { return 0.5 * M_PI * std::sin(M_PI * tau); }
double blend_accel(double tau) { return 0.5 * M_PI * M_PI * std::cos(M_PI * tau); }

/// Inverse of blend(): tau such that blend(tau) = f, for f in [0,1].
double blend_inverse(double f) { return std::acos(1.0 - 2.0 * f) / M_PI; }

struct SpeedCurve {
  // Knot times/speeds with the entry state prepended; constant after the
  // last knot.
  std::vector<double> times;
  std::vector<double> speeds;
  std::vector<double> travelled;  // cumulative distance at each knot

  double speed_at(double t) const {
    if (t <= times.front()) return speeds.front();
    if (t >= times.back()) return speeds.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin());
    const double f = (t - times[k - 1]) / (times[k] - times[k - 1]);
    return speeds[k - 1] + f * (speeds[k] - speeds[k - 1]);
  }

  double accel_at(double t) const {
    if (t <= times.front() || t >= times.back()) return 0.0;
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin());
    return (speeds[k] - speeds[k - 1]) / (times[k] - times[k - 1]);
  }

  double distance_at(double t) const {
    if (t <= times.front()) return 0.0;
    if (t >= times.back()) {
      return travelled.back() + speeds.back() * (t - times.back());
    }
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin());
    const double dt = t - times[k - 1];
    const double v0 = speeds[k - 1];
    const double v1 = speed_at(t);
    return travelled[k - 1] + 0.5 * (v0 + v1) * dt;
  }
};

SpeedCurve build_speed_curve(const ScriptedVehicle& v) {
  SpeedCurve curve;
  curve.times.push_back(v.enter);
  curve.speeds.push_back(v.speed);
  for (const SpeedKnot& knot : v.speed_profile) {
    if (knot.time < curve.times.back()) {
      fail(ErrorKind::parameter, "vehicle " + std::to_string(v.id) +
                                     ": speed profile knots must be time-ordered after entry");
    }
    curve.times.push_back(knot.time);
    curve.speeds.push_back(knot.speed);
  }
  curve.travelled.assign(curve.times.size(), 0.0);
  for (std::size_t k = 1; k < curve.times.size(); ++k) {
    curve.travelled[k] = curve.travelled[k - 1] +
                         0.5 * (curve.speeds[k] + curve.speeds[k - 1]) *
                             (curve.times[k] - curve.times[k - 1]);
  }
  return curve;
}

struct LateralPlan {
  // Resolved maneuver windows in script order.
  struct Segment {
    double start, end;  // profile window
    int from_lane, to_lane;
    double from_center, to_center;  // raw lateral centers
  };
  std::vector<Segment> segments;
  double initial_center = 0.0;

  double center_at(double t) const {
    double center = initial_center;
    for (const auto& seg : segments) {
      if (t >= seg.end) {
        center = seg.to_center;
      } else if (t > seg.start) {
        const double tau = (t - seg.start) / (seg.end - seg.start);
        return seg.from_center + (seg.to_center - seg.from_center) * blend(tau);
      }
    }
    return center;
  }

  double rate_at(double t) const {
    for (const auto& seg : segments) {
      if (t > seg.start && t < seg.end) {
        const double dur = seg.end - seg.start;
        const double tau = (t - seg.start) / dur;
        return (seg.to_center - seg.from_center) * blend_rate(tau) / dur;
      }
    }
    return 0.0;
  }

  double accel_at(double t) const {
    for (const auto& seg : segments) {
      if (t > seg.start && t < seg.end) {
        const double dur = seg.end - seg.start;
        const double tau = (t - seg.start) / dur;
        return (seg.to_center - seg.from_center) * blend_accel(tau) / (dur * dur);
      }
    }
    return 0.0;
  }
};

}  // namespace

ScenarioScript parse_script(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, std::string("scenario script: ") + e.what());
  }

  ScenarioScript script;
  script.recording_id = doc.value("id", 1);
  script.frame_rate = doc.value("frame_rate", 25.0);
  script.duration = doc.value("duration", 0.0);
  script.lateral_jitter_sd = doc.value("lateral_jitter_sd", 0.0);
  script.speed_jitter_sd = doc.value("speed_jitter_sd", 0.0);
  if (doc.contains("lane_markings")) {
    const auto& lm = doc.at("lane_markings");
    if (lm.contains("dir1")) script.dir1_markings = lm.at("dir1").get<std::vector<double>>();
    if (lm.contains("dir2")) script.dir2_markings = lm.at("dir2").get<std::vector<double>>();
  }
  for (const auto& jv : doc.value("vehicles", json::array())) {
    ScriptedVehicle v;
    v.id = jv.at("id").get<int>();
    v.vehicle_class = vehicle_class_from_string(jv.value("class", std::string("car")));
    v.length = jv.value("length", 4.5);
    v.width = jv.value("width", 2.0);
    v.direction = direction_from_string(jv.value("direction", std::string("dir2")));
    v.enter = jv.value("enter", 0.0);
    v.exit = jv.value("exit", -1.0);
    v.initial_lane = jv.at("initial_lane").get<int>();
    v.initial_x = jv.value("initial_x", 0.0);
    v.speed = jv.value("speed", 30.0);
    for (const auto& jk : jv.value("speed_profile", json::array())) {
      v.speed_profile.push_back(SpeedKnot{jk.at("t").get<double>(), jk.at("v").get<double>()});
    }
    for (const auto& jc : jv.value("lane_changes", json::array())) {
      v.lane_changes.push_back(ScriptedLaneChange{jc.at("at").get<double>(),
                                                  jc.at("to").get<int>(),
                                                  jc.value("duration", 4.0)});
    }
    script.vehicles.push_back(std::move(v));
  }
  return script;
}

ScenarioScript load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open scenario script " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_script(buffer.str());
}

SyntheticResult generate_synthetic(const ScenarioScript& script, std::uint64_t seed) {
  if (!(script.duration > 0)) {
    fail(ErrorKind::parameter, "scenario script: duration must be positive");
  }
  if (!(script.frame_rate > 0)) {
    fail(ErrorKind::parameter, "scenario script: frame_rate must be positive");
  }

  SyntheticResult result;
  Recording& recording = result.recording;
  recording.id = script.recording_id;
  recording.frame_rate = script.frame_rate;
  recording.duration = script.duration;
  recording.layout = LaneLayout::from_markings(script.dir1_markings, script.dir2_markings);
  const LaneLayout& layout = recording.layout;
  const double dt = recording.dt();

  for (const ScriptedVehicle& v : script.vehicles) {
    if (recording.tracks.count(v.id)) {
      fail(ErrorKind::parameter, "scenario script: duplicate vehicle id " + std::to_string(v.id));
    }
    if (!layout.has_lane(v.initial_lane) ||
        layout.lane(v.initial_lane).direction != v.direction) {
      fail(ErrorKind::parameter, "vehicle " + std::to_string(v.id) +
                                     ": initial lane not in the scripted layout");
    }

    const double exit = v.exit < 0 ? script.duration : v.exit;
    if (!(exit > v.enter)) {
      fail(ErrorKind::parameter,
           "vehicle " + std::to_string(v.id) + ": exit must be after entry");
    }

    // Resolve maneuvers against the layout and collect ground truth.
    LateralPlan plan;
    auto center_of = [&](int lane) {
      const LaneBounds& b = layout.lane(lane).bounds;
      return 0.5 * (b.low + b.high);
    };
    plan.initial_center = center_of(v.initial_lane);
    int current_lane = v.initial_lane;
    double previous_end = v.enter;
    for (const ScriptedLaneChange& change : v.lane_changes) {
      if (!(change.duration > 0)) {
        fail(ErrorKind::parameter,
             "vehicle " + std::to_string(v.id) + ": lane-change duration must be positive");
      }
      if (!layout.has_lane(change.to_lane) ||
          layout.lane(change.to_lane).direction != v.direction) {
        fail(ErrorKind::parameter, "vehicle " + std::to_string(v.id) +
                                       ": target lane not in the scripted layout");
      }
      if (!layout.adjacent(current_lane, change.to_lane)) {
        fail(ErrorKind::parameter, "vehicle " + std::to_string(v.id) +
                                       ": scripted change between non-adjacent lanes");
      }
      const double start = change.at - 0.5 * change.duration;
      const double end = change.at + 0.5 * change.duration;
      if (start < previous_end - 1e-9) {
        fail(ErrorKind::parameter,
             "vehicle " + std::to_string(v.id) + ": overlapping lane-change segments");
      }
      LateralPlan::Segment seg;
      seg.start = start;
      seg.end = end;
      seg.from_lane = current_lane;
      seg.to_lane = change.to_lane;
      seg.from_center = center_of(current_lane);
      seg.to_center = center_of(change.to_lane);
      plan.segments.push_back(seg);

      // Ground truth in canonical coordinates (affine maps commute with
      // the blend, so fractions computed canonically are exact).
      const DrivingDirection d = v.direction;
      const double c_src = layout.canonical_lateral(d, seg.from_center);
      const double c_tgt = layout.canonical_lateral(d, seg.to_center);
      const double boundary =
          layout.canonical_lateral(d, layout.shared_boundary(current_lane, change.to_lane));
      const bool inward = c_tgt < c_src;
      const double f_lc = (boundary - c_src) / (c_tgt - c_src);
      const double f_e = inward ? (boundary - 0.5 * v.width - c_src) / (c_tgt - c_src)
                                : (boundary + 0.5 * v.width - c_src) / (c_tgt - c_src);
      if (!(f_lc > 0.0 && f_lc < 1.0) || !(f_e > 0.0 && f_e <= 1.0)) {
        fail(ErrorKind::parameter,
             "vehicle " + std::to_string(v.id) +
                 ": vehicle too wide for the scripted lanes (no interior crossing)");
      }
      GroundTruthEvent truth;
      truth.vehicle_id = v.id;
      truth.t_lc = start + blend_inverse(f_lc) * change.duration;
      truth.t_e = start + blend_inverse(f_e) * change.duration;
      truth.source_lane = current_lane;
      truth.target_lane = change.to_lane;
      truth.inward = inward;
      truth.complete = truth.t_e <= std::min(exit, script.duration) + 1e-9;
      result.ground_truth.push_back(truth);

      current_lane = change.to_lane;
      previous_end = end;
    }

    // Sample the continuous profiles on the frame grid.
    const SpeedCurve speed = build_speed_curve(v);
    Rng rng(fnv1a64(std::to_string(seed) + ":" + std::to_string(v.id)));

    Track track;
    track.vehicle_id = v.id;
    track.vehicle_class = v.vehicle_class;
    track.length = v.length;
    track.lateral_extent = v.width;
    track.driving_direction = v.direction;

    const long long first = static_cast<long long>(std::ceil(v.enter / dt - 1e-9));
    const long long last = std::min(static_cast<long long>(std::floor(exit / dt + 1e-9)),
                                    static_cast<long long>(std::floor(script.duration / dt + 1e-9)));
    const double sign = v.direction == DrivingDirection::dir1 ? -1.0 : 1.0;
    for (long long k = first; k <= last; ++k) {
      const double t = static_cast<double>(k) * dt;
      FrameSample s;
      s.time = t;
      const double travelled = speed.distance_at(t);
      double center_y = plan.center_at(t);
      if (script.lateral_jitter_sd > 0) {
        center_y += script.lateral_jitter_sd * rng.next_normal();
      }
      double vx_noise = 0.0;
      if (script.speed_jitter_sd > 0) {
        vx_noise = script.speed_jitter_sd * rng.next_normal();
      }
      s.x = v.initial_x + sign * travelled;
      s.y = center_y - 0.5 * v.width;
      s.vx = sign * (speed.speed_at(t) + vx_noise);
      s.vy = plan.rate_at(t);
      s.ax = sign * speed.accel_at(t);
      s.ay = plan.accel_at(t);
      s.lane_id = layout.lane_at(v.direction, center_y);
      track.frames.push_back(s);
    }
    if (track.frames.empty()) {
      fail(ErrorKind::parameter,
           "vehicle " + std::to_string(v.id) + ": no frames inside the recording span");
    }
    recording.tracks.emplace(v.id, std::move(track));
  }

  // Surrounding-vehicle columns, computed the way the source dataset
  // defines them: neighbors in the driver frame, left = inner side.
  for (auto& [id, track] : recording.tracks) {
    for (FrameSample& s : track.frames) {
      const int lane = s.lane_id;
      if (lane == kOffRoadLane) continue;
      const int inner = layout.inner_neighbor(lane);
      const int outer = layout.outer_neighbor(lane);
      const double front = canonical_front(track, s);
      const double rear = canonical_rear(track, s);

      struct Best {
        double gap = 0.0;
        VehicleId id = kNoVehicle;
      };
      Best prec, foll, lp, la, lf, rp, ra, rf;
      for (const auto& [other_id, other] : recording.tracks) {
        if (other_id == id || other.driving_direction != track.driving_direction) continue;
        if (!other.covers(s.time)) continue;
        const FrameSample& os = other.sample_at(s.time);
        const double o_front = canonical_front(other, os);
        const double o_rear = canonical_rear(other, os);
        // Plain copy: lambdas may not capture structured bindings portably.
        const VehicleId candidate = other_id;
        auto consider = [&](Best& ahead, Best& alongside, Best& behind) {
          if (o_rear >= front) {
            const double gap = o_rear - front;
            if (ahead.id == kNoVehicle || gap < ahead.gap) ahead = {gap, candidate};
          } else if (o_front <= rear) {
            const double gap = rear - o_front;
            if (behind.id == kNoVehicle || gap < behind.gap) behind = {gap, candidate};
          } else {
            const double gap = std::abs(0.5 * (o_front + o_rear) - 0.5 * (front + rear));
            if (alongside.id == kNoVehicle || gap < alongside.gap) alongside = {gap, candidate};
          }
        };
        Best dummy;
        if (os.lane_id == lane) {
          consider(prec, dummy, foll);
        } else if (inner != kOffRoadLane && os.lane_id == inner) {
          consider(lp, la, lf);
        } else if (outer != kOffRoadLane && os.lane_id == outer) {
          consider(rp, ra, rf);
        }
      }
      s.preceding_id = prec.id;
      s.following_id = foll.id;
      s.left_preceding_id = lp.id;
      s.left_alongside_id = la.id;
      s.left_following_id = lf.id;
      s.right_preceding_id = rp.id;
      s.right_alongside_id = ra.id;
      s.right_following_id = rf.id;
    }
  }

  std::sort(result.ground_truth.begin(), result.ground_truth.end(),
            [](const GroundTruthEvent& a, const GroundTruthEvent& b) {
              if (a.t_lc != b.t_lc) return a.t_lc < b.t_lc;
              return a.vehicle_id < b.vehicle_id;
            });
  validate_recording(recording);
  return result;
}

}  // namespace lcmine
