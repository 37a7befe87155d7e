#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lcmine/mine.hpp"
#include "lcmine/types.hpp"

namespace lcmine {

/// Half-open interval [begin, end).
struct Interval {
  double begin = 0.0;
  double end = 0.0;
  double length() const { return end - begin; }
  bool contains(double t) const { return t >= begin && t < end; }
};

/// Four abutting windows before the start instant and four after the end
/// instant, each half the change duration wide. before[k] is T_(k+1)s,
/// after[k] is T_(k+1)e.
struct PeriodWindows {
  double width = 0.0;
  std::array<Interval, 4> before;
  std::array<Interval, 4> after;
};

PeriodWindows period_windows(const LaneChangeEvent& event);

enum class Channel { speed, position };

struct WindowValue {
  bool complete = false;
  double value = 0.0;
  double coverage = 0.0;

  std::optional<double> opt() const {
    return complete ? std::optional<double>(value) : std::nullopt;
  }
};

/// Arithmetic mean of a channel over the track samples inside the window.
/// Incomplete when less than min_coverage of the expected samples exist.
/// The speed channel is the forward speed in the travel direction; the
/// position channel is the canonical front-bumper position.
WindowValue window_mean(const Track& track, Interval window, Channel channel, double dt,
                        double min_coverage = 0.8);

/// Mean bumper-to-bumper gap (leader rear minus follower front) over the
/// samples where both vehicles are present.
WindowValue window_gap_mean(const Track& leader, const Track& follower, Interval window,
                            double dt, double min_coverage = 0.8);

struct UtilityOptions {
  double min_coverage = 0.8;
  double ttc_threshold = 4.0;
  /// When true (default) the first subject's windows are anchored on its
  /// own start/end instants; the pair index (i,j) names the ordinal for
  /// both vehicles. When false, the first subject is measured on the
  /// second subject's windows.
  bool anchor_sv1_on_own_event = true;
};

/// One period-pair comparison: the five utility measures, each absent when
/// its windows lack coverage.
struct UtilityRecord {
  int scenario_index = 0;
  int before_period = 1;  // i in 1..4
  int after_period = 1;   // j in 1..4
  std::optional<double> dy_tlv;   // (TLV2-SV2) - (TLV1-SV1) clearance, after
  std::optional<double> dy_tfv;   // (SV2-TFV2) - (SV1-TFV1) clearance, after
  std::optional<double> dv_sv1;   // SV1 speed after - before
  std::optional<double> dv_sv2;   // SV2 speed after - before
  std::optional<double> dv_diff;  // dv_sv2 - dv_sv1
};

UtilityRecord utility_record(const Recording& recording, const ConsecutiveScenario& scenario,
                             int scenario_index, int before_period, int after_period,
                             const UtilityOptions& options = {});

/// All 16 period pairs for every scenario.
std::vector<UtilityRecord> utility_records(const Recording& recording,
                                           const std::vector<ConsecutiveScenario>& scenarios,
                                           const UtilityOptions& options = {});

inline const std::array<const char*, 5> kMeasureNames = {"dy_tlv", "dy_tfv", "dv_sv1",
                                                         "dv_sv2", "dv_diff"};

struct MatrixCell {
  int n = 0;
  std::optional<double> proportion_positive;
  std::optional<double> mean;
};

struct ComparisonMatrix {
  std::string measure;
  std::array<std::array<MatrixCell, 4>, 4> cells;  // [before-1][after-1]
};

ComparisonMatrix comparison_matrix(const std::vector<UtilityRecord>& records,
                                   const std::string& measure);

/// Time-to-collision of a leader/follower pair: bumper gap over closing
/// speed, infinite when not closing. Throws a geometry error when the gap
/// is negative.
double ttc(double x_lv, double x_fv, double leader_length, double v_fv, double v_lv);

/// 1 iff 0 < ttc_value < threshold (strict on both sides).
int pair_risk(double ttc_value, double threshold = 4.0);

/// 0 iff all three pair flags are 0.
int group_risk(int clv_flag, int tlv_flag, int tfv_flag);

struct RiskRow {
  double clv = 0.0;
  double tlv = 0.0;
  double tfv = 0.0;
  double group = 0.0;
};

struct RiskTable {
  RiskRow sv1;
  RiskRow sv2;
  int scenario_count = 0;
};

/// Fraction of scenarios whose minimum in-process TTC against each
/// neighbor trips the risk flag; null neighbors contribute no risk.
RiskTable risk_table(const Recording& recording,
                     const std::vector<ConsecutiveScenario>& scenarios,
                     double threshold = 4.0);

/// Minimum finite TTC between leader and follower over the subject's
/// samples in [from, to] (closed); infinity when never closing. Frames
/// where the pair overlaps longitudinally are skipped.
double min_pair_ttc(const Recording& recording, VehicleId leader, VehicleId follower,
                    double from, double to);

// ---------------------------------------------------------------------
// Model dataset (dependent variable and explanatory features per scenario)

inline const std::array<const char*, 8> kModelFeatureNames = {
    "dy_after_tlv1_sv1", "dy_after_sv1_tfv1", "dy_before_clv1_sv1", "dy_before_clv2_sv2",
    "v_before_sv1",      "v_before_sv2",      "v_after_sv1",        "delta_t"};

/// Computed but excluded from design matrices (they are functions of the
/// dependent variable's ingredients).
inline const std::array<const char*, 3> kWithheldFeatureNames = {
    "v_after_sv2", "dy_after_tlv2_sv2", "dy_after_sv2_tfv2"};

struct ScenarioFeatures {
  int scenario_index = 0;
  std::optional<int> y;  // 1 iff the second subject's speed utility rose
  std::array<std::optional<double>, 8> features;
  std::array<std::optional<double>, 3> withheld;
  bool complete() const;
};

std::vector<ScenarioFeatures> extract_features(const Recording& recording,
                                               const std::vector<ConsecutiveScenario>& scenarios,
                                               int before_period, int after_period,
                                               const UtilityOptions& options = {});

void write_records_csv(const std::vector<UtilityRecord>& records, const std::string& path);
void write_matrix_csv(const ComparisonMatrix& matrix, const std::string& path);
void write_risk_csv(const RiskTable& table, const std::string& path);
void write_features_csv(const std::vector<ScenarioFeatures>& rows, const std::string& path);
std::vector<ScenarioFeatures> read_features_csv(const std::string& path);

}  // namespace lcmine
