#include "lcmine/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lcmine/csv.hpp"

namespace lcmine {

PeriodWindows period_windows(const LaneChangeEvent& event) {
  if (!(event.duration > 0)) {
    fail(ErrorKind::precondition, "period_windows requires a positive change duration");
  }
  PeriodWindows w;
  w.width = 0.5 * event.duration;
  for (int k = 1; k <= 4; ++k) {
    w.before[k - 1] = Interval{event.t_s - k * w.width, event.t_s - (k - 1) * w.width};
    w.after[k - 1] = Interval{event.t_e + (k - 1) * w.width, event.t_e + k * w.width};
  }
  return w;
}

namespace {

double channel_value(const Track& track, const FrameSample& s, Channel channel) {
  switch (channel) {
    case Channel::speed:
      return canonical_forward_speed(track, s);
    case Channel::position:
      return canonical_front(track, s);
  }
  return 0.0;
}

double expected_samples(Interval window, double dt) {
  return window.length() / dt;
}

}  // namespace

WindowValue window_mean(const Track& track, Interval window, Channel channel, double dt,
                        double min_coverage) {
  if (!(window.length() > 0)) {
    fail(ErrorKind::parameter, "window must have positive length");
  }
  WindowValue out;
  double sum = 0.0;
  int count = 0;
  for (const FrameSample& s : track.frames) {
    if (s.time < window.begin) continue;
    if (s.time >= window.end) break;
    sum += channel_value(track, s, channel);
    ++count;
  }
  const double expected = expected_samples(window, dt);
  out.coverage = expected > 0 ? count / expected : 0.0;
  if (count > 0 && out.coverage + 1e-9 >= min_coverage) {
    out.complete = true;
    out.value = sum / count;
  }
  return out;
}

WindowValue window_gap_mean(const Track& leader, const Track& follower, Interval window,
                            double dt, double min_coverage) {
  if (!(window.length() > 0)) {
    fail(ErrorKind::parameter, "window must have positive length");
  }
  WindowValue out;
  double sum = 0.0;
  int count = 0;
  for (const FrameSample& fs : follower.frames) {
    if (fs.time < window.begin) continue;
    if (fs.time >= window.end) break;
    if (!leader.covers(fs.time)) continue;
    const FrameSample& ls = leader.sample_at(fs.time);
    sum += canonical_rear(leader, ls) - canonical_front(follower, fs);
    ++count;
  }
  const double expected = expected_samples(window, dt);
  out.coverage = expected > 0 ? count / expected : 0.0;
  if (count > 0 && out.coverage + 1e-9 >= min_coverage) {
    out.complete = true;
    out.value = sum / count;
  }
  return out;
}

namespace {

std::optional<double> gap_or_null(const Recording& recording, VehicleId leader,
                                  VehicleId follower, Interval window,
                                  const UtilityOptions& options) {
  if (leader == kNoVehicle || follower == kNoVehicle) return std::nullopt;
  const Track* lt = recording.find_track(leader);
  const Track* ft = recording.find_track(follower);
  if (!lt || !ft) return std::nullopt;
  return window_gap_mean(*lt, *ft, window, recording.dt(), options.min_coverage).opt();
}

std::optional<double> speed_or_null(const Recording& recording, VehicleId vehicle,
                                    Interval window, const UtilityOptions& options) {
  const Track* t = recording.find_track(vehicle);
  if (!t) return std::nullopt;
  return window_mean(*t, window, Channel::speed, recording.dt(), options.min_coverage).opt();
}

std::optional<double> minus(std::optional<double> a, std::optional<double> b) {
  if (a && b) return *a - *b;
  return std::nullopt;
}

}  // namespace

UtilityRecord utility_record(const Recording& recording, const ConsecutiveScenario& scenario,
                             int scenario_index, int before_period, int after_period,
                             const UtilityOptions& options) {
  if (before_period < 1 || before_period > 4 || after_period < 1 || after_period > 4) {
    fail(ErrorKind::parameter, "period indices must lie in 1..4");
  }
  const PeriodWindows w2 = period_windows(scenario.v2.event);
  const PeriodWindows w1 = options.anchor_sv1_on_own_event ? period_windows(scenario.v1.event)
                                                           : w2;
  const Interval before1 = w1.before[before_period - 1];
  const Interval after1 = w1.after[after_period - 1];
  const Interval before2 = w2.before[before_period - 1];
  const Interval after2 = w2.after[after_period - 1];

  UtilityRecord rec;
  rec.scenario_index = scenario_index;
  rec.before_period = before_period;
  rec.after_period = after_period;

  const auto speed2_after = speed_or_null(recording, scenario.v2.sv, after2, options);
  const auto speed2_before = speed_or_null(recording, scenario.v2.sv, before2, options);
  const auto speed1_after = speed_or_null(recording, scenario.v1.sv, after1, options);
  const auto speed1_before = speed_or_null(recording, scenario.v1.sv, before1, options);
  rec.dv_sv2 = minus(speed2_after, speed2_before);
  rec.dv_sv1 = minus(speed1_after, speed1_before);
  rec.dv_diff = minus(rec.dv_sv2, rec.dv_sv1);

  rec.dy_tlv = minus(gap_or_null(recording, scenario.v2.tlv, scenario.v2.sv, after2, options),
                     gap_or_null(recording, scenario.v1.tlv, scenario.v1.sv, after1, options));
  rec.dy_tfv = minus(gap_or_null(recording, scenario.v2.sv, scenario.v2.tfv, after2, options),
                     gap_or_null(recording, scenario.v1.sv, scenario.v1.tfv, after1, options));
  return rec;
}

std::vector<UtilityRecord> utility_records(const Recording& recording,
                                           const std::vector<ConsecutiveScenario>& scenarios,
                                           const UtilityOptions& options) {
  std::vector<UtilityRecord> records;
  records.reserve(scenarios.size() * 16);
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (int i = 1; i <= 4; ++i) {
      for (int j = 1; j <= 4; ++j) {
        records.push_back(
            utility_record(recording, scenarios[s], static_cast<int>(s), i, j, options));
      }
    }
  }
  return records;
}

namespace {

std::optional<double> record_measure(const UtilityRecord& r, const std::string& measure) {
  if (measure == "dy_tlv") return r.dy_tlv;
  if (measure == "dy_tfv") return r.dy_tfv;
  if (measure == "dv_sv1") return r.dv_sv1;
  if (measure == "dv_sv2") return r.dv_sv2;
  if (measure == "dv_diff") return r.dv_diff;
  fail(ErrorKind::parameter, "unknown utility measure '" + measure + "'");
}

}  // namespace

ComparisonMatrix comparison_matrix(const std::vector<UtilityRecord>& records,
                                   const std::string& measure) {
  ComparisonMatrix matrix;
  matrix.measure = measure;
  std::array<std::array<double, 4>, 4> sums{};
  std::array<std::array<int, 4>, 4> positives{};
  for (const UtilityRecord& r : records) {
    const auto value = record_measure(r, measure);
    if (!value) continue;
    auto& cell = matrix.cells[r.before_period - 1][r.after_period - 1];
    ++cell.n;
    sums[r.before_period - 1][r.after_period - 1] += *value;
    if (*value > 0) ++positives[r.before_period - 1][r.after_period - 1];
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      auto& cell = matrix.cells[i][j];
      if (cell.n > 0) {
        cell.mean = sums[i][j] / cell.n;
        cell.proportion_positive = static_cast<double>(positives[i][j]) / cell.n;
      }
    }
  }
  return matrix;
}

double ttc(double x_lv, double x_fv, double leader_length, double v_fv, double v_lv) {
  const double gap = x_lv - x_fv - leader_length;
  if (gap < 0) {
    fail(ErrorKind::geometry, "ttc: negative bumper gap (overlapping vehicles)");
  }
  if (v_fv > v_lv) return gap / (v_fv - v_lv);
  return std::numeric_limits<double>::infinity();
}

int pair_risk(double ttc_value, double threshold) {
  if (!(threshold > 0)) fail(ErrorKind::parameter, "pair_risk threshold must be positive");
  return (ttc_value > 0.0 && ttc_value < threshold) ? 1 : 0;
}

int group_risk(int clv_flag, int tlv_flag, int tfv_flag) {
  return (clv_flag == 0 && tlv_flag == 0 && tfv_flag == 0) ? 0 : 1;
}

double min_pair_ttc(const Recording& recording, VehicleId leader, VehicleId follower,
                    double from, double to) {
  double best = std::numeric_limits<double>::infinity();
  if (leader == kNoVehicle || follower == kNoVehicle) return best;
  const Track* lt = recording.find_track(leader);
  const Track* ft = recording.find_track(follower);
  if (!lt || !ft) return best;
  for (const FrameSample& fs : ft->frames) {
    if (fs.time < from - 1e-9) continue;
    if (fs.time > to + 1e-9) break;
    if (!lt->covers(fs.time)) continue;
    const FrameSample& ls = lt->sample_at(fs.time);
    const double gap = canonical_rear(*lt, ls) - canonical_front(*ft, fs);
    if (gap < 0) continue;  // side-by-side geometry, TTC undefined
    const double v_f = canonical_forward_speed(*ft, fs);
    const double v_l = canonical_forward_speed(*lt, ls);
    if (v_f > v_l) best = std::min(best, gap / (v_f - v_l));
  }
  return best;
}

RiskTable risk_table(const Recording& recording,
                     const std::vector<ConsecutiveScenario>& scenarios, double threshold) {
  RiskTable table;
  table.scenario_count = static_cast<int>(scenarios.size());
  if (scenarios.empty()) return table;

  auto accumulate = [&](const VehicleGroup& g, RiskRow& row) {
    const double from = g.event.t_s;
    const double to = g.event.t_e;
    const int clv = pair_risk(min_pair_ttc(recording, g.clv, g.sv, from, to), threshold);
    const int tlv = pair_risk(min_pair_ttc(recording, g.tlv, g.sv, from, to), threshold);
    const int tfv = pair_risk(min_pair_ttc(recording, g.sv, g.tfv, from, to), threshold);
    row.clv += clv;
    row.tlv += tlv;
    row.tfv += tfv;
    row.group += group_risk(clv, tlv, tfv);
  };
  for (const ConsecutiveScenario& s : scenarios) {
    accumulate(s.v1, table.sv1);
    accumulate(s.v2, table.sv2);
  }
  const double n = table.scenario_count;
  for (RiskRow* row : {&table.sv1, &table.sv2}) {
    row->clv /= n;
    row->tlv /= n;
    row->tfv /= n;
    row->group /= n;
  }
  return table;
}

bool ScenarioFeatures::complete() const {
  if (!y) return false;
  for (const auto& f : features) {
    if (!f) return false;
  }
  return true;
}

std::vector<ScenarioFeatures> extract_features(const Recording& recording,
                                               const std::vector<ConsecutiveScenario>& scenarios,
                                               int before_period, int after_period,
                                               const UtilityOptions& options) {
  std::vector<ScenarioFeatures> rows;
  rows.reserve(scenarios.size());
  for (std::size_t idx = 0; idx < scenarios.size(); ++idx) {
    const ConsecutiveScenario& sc = scenarios[idx];
    const PeriodWindows w1 = period_windows(sc.v1.event);
    const PeriodWindows w2 = period_windows(sc.v2.event);
    const Interval before1 = w1.before[before_period - 1];
    const Interval after1 = w1.after[after_period - 1];
    const Interval before2 = w2.before[before_period - 1];
    const Interval after2 = w2.after[after_period - 1];

    ScenarioFeatures row;
    row.scenario_index = static_cast<int>(idx);
    row.features[0] = gap_or_null(recording, sc.v1.tlv, sc.v1.sv, after1, options);
    row.features[1] = gap_or_null(recording, sc.v1.sv, sc.v1.tfv, after1, options);
    row.features[2] = gap_or_null(recording, sc.v1.clv, sc.v1.sv, before1, options);
    row.features[3] = gap_or_null(recording, sc.v2.clv, sc.v2.sv, before2, options);
    row.features[4] = speed_or_null(recording, sc.v1.sv, before1, options);
    row.features[5] = speed_or_null(recording, sc.v2.sv, before2, options);
    row.features[6] = speed_or_null(recording, sc.v1.sv, after1, options);
    row.features[7] = sc.delta_t;

    const auto v_after_sv2 = speed_or_null(recording, sc.v2.sv, after2, options);
    row.withheld[0] = v_after_sv2;
    row.withheld[1] = gap_or_null(recording, sc.v2.tlv, sc.v2.sv, after2, options);
    row.withheld[2] = gap_or_null(recording, sc.v2.sv, sc.v2.tfv, after2, options);

    const auto dv_sv2 = minus(v_after_sv2, row.features[5]);
    if (dv_sv2) row.y = *dv_sv2 > 0 ? 1 : 0;
    rows.push_back(row);
  }
  return rows;
}

void write_records_csv(const std::vector<UtilityRecord>& records, const std::string& path) {
  CsvWriter w(path);
  w.write_header({"scenario", "before_period", "after_period", "dy_tlv", "dy_tfv", "dv_sv1",
                  "dv_sv2", "dv_diff"});
  auto add_opt = [&](const std::optional<double>& v) {
    if (v) {
      w.add(*v);
    } else {
      w.add_null();
    }
  };
  for (const UtilityRecord& r : records) {
    w.begin_row();
    w.add(r.scenario_index);
    w.add(r.before_period);
    w.add(r.after_period);
    add_opt(r.dy_tlv);
    add_opt(r.dy_tfv);
    add_opt(r.dv_sv1);
    add_opt(r.dv_sv2);
    add_opt(r.dv_diff);
    w.end_row();
  }
}

void write_matrix_csv(const ComparisonMatrix& matrix, const std::string& path) {
  CsvWriter w(path);
  w.write_header({"measure", "before_period", "after_period", "n", "proportion_positive",
                  "mean"});
  for (int i = 1; i <= 4; ++i) {
    for (int j = 1; j <= 4; ++j) {
      const MatrixCell& cell = matrix.cells[i - 1][j - 1];
      w.begin_row();
      w.add(matrix.measure);
      w.add(i);
      w.add(j);
      w.add(cell.n);
      if (cell.proportion_positive) {
        w.add(*cell.proportion_positive);
      } else {
        w.add_null();
      }
      if (cell.mean) {
        w.add(*cell.mean);
      } else {
        w.add_null();
      }
      w.end_row();
    }
  }
}

void write_risk_csv(const RiskTable& table, const std::string& path) {
  CsvWriter w(path);
  w.write_header({"lane_changing_vehicle", "clv", "tlv", "tfv", "vehicle_group"});
  auto row = [&](const char* name, const RiskRow& r) {
    w.begin_row();
    w.add(name);
    w.add(r.clv);
    w.add(r.tlv);
    w.add(r.tfv);
    w.add(r.group);
    w.end_row();
  };
  row("SV1", table.sv1);
  row("SV2", table.sv2);
}

void write_features_csv(const std::vector<ScenarioFeatures>& rows, const std::string& path) {
  CsvWriter w(path);
  std::vector<std::string> header = {"scenario", "y"};
  for (const char* name : kModelFeatureNames) header.push_back(name);
  for (const char* name : kWithheldFeatureNames) header.push_back(name);
  w.write_header(header);
  for (const ScenarioFeatures& row : rows) {
    w.begin_row();
    w.add(row.scenario_index);
    if (row.y) {
      w.add(*row.y);
    } else {
      w.add_null();
    }
    for (const auto& f : row.features) {
      if (f) {
        w.add(*f);
      } else {
        w.add_null();
      }
    }
    for (const auto& f : row.withheld) {
      if (f) {
        w.add(*f);
      } else {
        w.add_null();
      }
    }
    w.end_row();
  }
}

std::vector<ScenarioFeatures> read_features_csv(const std::string& path) {
  CsvTable t = CsvTable::read_file(path);
  const std::size_t c_scenario = t.column("scenario");
  const std::size_t c_y = t.column("y");
  std::array<std::size_t, 8> c_features{};
  for (std::size_t k = 0; k < kModelFeatureNames.size(); ++k) {
    c_features[k] = t.column(kModelFeatureNames[k]);
  }
  std::array<std::size_t, 3> c_withheld{};
  for (std::size_t k = 0; k < kWithheldFeatureNames.size(); ++k) {
    c_withheld[k] = t.column(kWithheldFeatureNames[k]);
  }
  std::vector<ScenarioFeatures> rows;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    ScenarioFeatures row;
    row.scenario_index = static_cast<int>(t.cell_int(r, c_scenario));
    if (!t.cell(r, c_y).empty()) row.y = static_cast<int>(t.cell_int(r, c_y));
    for (std::size_t k = 0; k < c_features.size(); ++k) {
      if (!t.cell(r, c_features[k]).empty()) row.features[k] = t.cell_double(r, c_features[k]);
    }
    for (std::size_t k = 0; k < c_withheld.size(); ++k) {
      if (!t.cell(r, c_withheld[k]).empty()) row.withheld[k] = t.cell_double(r, c_withheld[k]);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lcmine
