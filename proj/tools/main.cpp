// Command-line front end: runs the full pipeline or one stage at a time,
// with CSV files as the inter-stage contract.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "lcmine/pipeline.hpp"

namespace {

using namespace lcmine;

struct InputFlags {
  std::string input_dir;
  std::string synthetic;
  std::string tracks, tracks_meta, recording_meta;

  void attach(CLI::App* cmd) {
    cmd->add_option("--input", input_dir, "Directory with the three recording CSV files");
    cmd->add_option("--synthetic", synthetic, "Synthetic scenario script (JSON)");
    cmd->add_option("--tracks", tracks, "Tracks CSV path");
    cmd->add_option("--tracks-meta", tracks_meta, "Tracks-meta CSV path");
    cmd->add_option("--recording-meta", recording_meta, "Recording-meta CSV path");
  }

  InputSpec to_spec() const {
    InputSpec spec;
    spec.recording_dir = input_dir;
    spec.synthetic_spec_path = synthetic;
    spec.tracks_path = tracks;
    spec.tracks_meta_path = tracks_meta;
    spec.recording_meta_path = recording_meta;
    return spec;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consecutive lane-change mining and utility analytics"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string out_dir = "out";
  std::uint64_t seed = 1;
  double max_interval = 9.0;
  bool require_behind = false;
  double ttc_threshold = 4.0;
  double min_coverage = 0.8;
  bool anchor_sv2 = false;
  std::string period_pair = "1s:1e";
  std::size_t draws = 200;
  std::string model = "all";
  std::string config_path;
  std::vector<std::string> fixed_features;
  std::vector<std::string> random_features;
  bool no_constant = false;
  int n_trees = 100;
  double svm_cost = 1.0;
  double svm_gamma = 0.0;
  double train_fraction = 0.8;

  InputFlags detect_input, mine_input, analyze_input;

  CLI::App* cmd_report = app.add_subcommand("report", "Run the full pipeline from a config file");
  cmd_report->add_option("--config", config_path, "Pipeline config (JSON)")->required();
  cmd_report->add_option("--out", out_dir, "Override the bundle directory");

  CLI::App* cmd_detect = app.add_subcommand("detect", "Detect lane-change events");
  detect_input.attach(cmd_detect);
  cmd_detect->add_option("--out", out_dir, "Bundle directory");
  cmd_detect->add_option("--seed", seed, "Seed for synthetic generation");

  CLI::App* cmd_mine = app.add_subcommand("mine", "Mine consecutive scenarios from events.csv");
  mine_input.attach(cmd_mine);
  cmd_mine->add_option("--out", out_dir, "Bundle directory");
  cmd_mine->add_option("--seed", seed, "Seed for synthetic generation");
  cmd_mine->add_option("--max-interval", max_interval, "Maximum start-time interval (s)");
  cmd_mine->add_flag("--require-behind", require_behind,
                     "Require the second subject behind the first at t_s1");

  CLI::App* cmd_analyze =
      app.add_subcommand("analyze", "Utility records, comparison matrices, risk table");
  analyze_input.attach(cmd_analyze);
  cmd_analyze->add_option("--out", out_dir, "Bundle directory");
  cmd_analyze->add_option("--seed", seed, "Seed for synthetic generation");
  cmd_analyze->add_option("--ttc-threshold", ttc_threshold, "Risk threshold in seconds");
  cmd_analyze->add_option("--coverage", min_coverage, "Minimum window coverage fraction");
  cmd_analyze->add_flag("--anchor-sv2", anchor_sv2,
                        "Measure the first subject on the second subject's windows");
  cmd_analyze->add_option("--period-pair", period_pair, "Feature period pair, e.g. 1s:1e");

  CLI::App* cmd_fit = app.add_subcommand("fit", "Estimate the random-parameters logit");
  cmd_fit->add_option("--out", out_dir, "Bundle directory (reads features.csv)");
  cmd_fit->add_option("--draws", draws, "Quasi-random draws per observation");
  cmd_fit->add_option("--period-pair", period_pair, "Period pair label for the report");
  cmd_fit->add_option("--fixed", fixed_features, "Fixed-coefficient features");
  cmd_fit->add_option("--random", random_features, "Random-coefficient features");
  cmd_fit->add_flag("--no-constant", no_constant, "Drop the constant term");

  CLI::App* cmd_predict = app.add_subcommand("predict", "Train and evaluate classifiers");
  cmd_predict->add_option("--out", out_dir, "Bundle directory (reads features.csv)");
  cmd_predict->add_option("--seed", seed, "Split/forest seed");
  cmd_predict->add_option("--model", model, "all, dt, rf or svm");
  cmd_predict->add_option("--trees", n_trees, "Forest size");
  cmd_predict->add_option("--cost", svm_cost, "SVM cost C");
  cmd_predict->add_option("--gamma", svm_gamma, "SVM RBF gamma (0: 1/d)");
  cmd_predict->add_option("--train-fraction", train_fraction, "Training split fraction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      return app.exit(e);
    }
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_report->parsed()) {
      PipelineConfig config = load_pipeline_config(config_path);
      if (cmd_report->count("--out")) config.out_dir = out_dir;
      run_pipeline(config);
      std::printf("bundle written to %s\n", config.out_dir.c_str());
      return 0;
    }
    if (cmd_detect->parsed()) {
      const Recording recording = resolve_input(detect_input.to_spec(), out_dir, seed);
      DetectionDiagnostics diag;
      stage_detect(recording, out_dir, &diag);
      std::printf("events.csv written (discarded: %d incomplete, %d sweeps)\n",
                  diag.discarded_incomplete, diag.discarded_sweep);
      return 0;
    }
    if (cmd_mine->parsed()) {
      const Recording recording = resolve_input(mine_input.to_spec(), out_dir, seed);
      MiningOptions options;
      options.max_interval = max_interval;
      options.require_sv2_behind_sv1 = require_behind;
      stage_mine(recording, out_dir, options);
      std::printf("scenarios.csv written\n");
      return 0;
    }
    if (cmd_analyze->parsed()) {
      UtilityOptions options;
      options.ttc_threshold = ttc_threshold;
      options.min_coverage = min_coverage;
      options.anchor_sv1_on_own_event = !anchor_sv2;
      PipelineConfig range_check;
      range_check.utility = options;
      validate_pipeline_config(range_check);
      const auto [before, after] = parse_period_pair(period_pair);
      const Recording recording = resolve_input(analyze_input.to_spec(), out_dir, seed);
      stage_analyze(recording, out_dir, options, before, after);
      std::printf("analysis outputs written\n");
      return 0;
    }
    if (cmd_fit->parsed()) {
      LogitSpec spec = PipelineConfig::default_logit_spec();
      if (!fixed_features.empty()) spec.fixed_features = fixed_features;
      if (!random_features.empty()) spec.random_features = random_features;
      spec.include_constant = !no_constant;
      spec.draws = draws;
      const auto [before, after] = parse_period_pair(period_pair);
      stage_fit(out_dir, spec, before, after);
      std::printf("logit_fit.json written\n");
      return 0;
    }
    if (cmd_predict->parsed()) {
      ClassifierOptions options;
      options.train_fraction = train_fraction;
      options.forest.n_trees = n_trees;
      options.svm.cost = svm_cost;
      options.svm.gamma = svm_gamma;
      if (model != "all") options.models = {model};
      stage_predict(out_dir, options, seed);
      std::printf("classifier_report.json written\n");
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
