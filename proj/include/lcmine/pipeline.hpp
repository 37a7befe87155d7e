#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcmine/classify.hpp"
#include "lcmine/detect.hpp"
#include "lcmine/logit.hpp"
#include "lcmine/mine.hpp"
#include "lcmine/utility.hpp"

namespace lcmine {

inline constexpr const char* kToolName = "lcmine";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kBundleFormat = 1;

/// Where the trajectory data comes from: either a directory with the three
/// recording CSVs (or explicit paths), or a synthetic scenario script that
/// is generated, written into the bundle, and re-read from disk so every
/// downstream stage sees CSV-precision data.
struct InputSpec {
  std::string recording_dir;
  std::string tracks_path;
  std::string tracks_meta_path;
  std::string recording_meta_path;
  std::string synthetic_spec_path;
  /// Logical-to-physical column overrides applied on top of the defaults.
  std::map<std::string, std::string> column_overrides;

  bool is_synthetic() const { return !synthetic_spec_path.empty(); }
};

struct ClassifierOptions {
  double train_fraction = 0.8;
  ForestConfig forest;
  TreeConfig tree;
  SvmConfig svm;
  std::vector<std::string> models = {"dt", "rf", "svm"};
};

struct PipelineConfig {
  InputSpec input;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  MiningOptions mining;
  UtilityOptions utility;
  int before_period = 1;
  int after_period = 1;
  LogitSpec logit = default_logit_spec();
  ClassifierOptions classifiers;

  /// Default model: clearance and interval effects with a normally mixed
  /// interval coefficient.
  static LogitSpec default_logit_spec();
};

/// Parses "1s:1e"-style period pair selectors.
std::pair<int, int> parse_period_pair(const std::string& text);
std::string period_pair_name(int before_period, int after_period);

PipelineConfig load_pipeline_config(const std::string& path);

/// Rejects options outside their documented ranges (risk threshold
/// 1.5-4 s, coverage in (0,1], positive interval, fraction in (0,1)).
void validate_pipeline_config(const PipelineConfig& config);

/// Resolves the input to an in-memory recording. Synthetic inputs are
/// materialized under <out_dir>/recording and reloaded from the CSVs.
Recording resolve_input(const InputSpec& input, const std::string& out_dir,
                        std::uint64_t seed);

// Individual stages; each reads its predecessor's files from the bundle
// directory and writes its own canonical outputs there.
void stage_detect(const Recording& recording, const std::string& out_dir,
                  DetectionDiagnostics* diagnostics = nullptr);
void stage_mine(const Recording& recording, const std::string& out_dir,
                const MiningOptions& options);
void stage_analyze(const Recording& recording, const std::string& out_dir,
                   const UtilityOptions& options, int before_period, int after_period);
void stage_fit(const std::string& out_dir, const LogitSpec& spec, int before_period,
               int after_period);
void stage_predict(const std::string& out_dir, const ClassifierOptions& options,
                   std::uint64_t seed);

/// Runs every stage in order and writes the manifest. Throws an Error
/// whose message names the failed stage; partial outputs of the failed
/// stage are removed and the manifest marks it failed.
void run_pipeline(const PipelineConfig& config);

}  // namespace lcmine
