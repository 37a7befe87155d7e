#include "lcmine/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lcmine/csv.hpp"
#include "lcmine/ingest.hpp"
#include "lcmine/mathutil.hpp"
#include "lcmine/synthetic.hpp"

namespace lcmine {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

LogitSpec PipelineConfig::default_logit_spec() {
  LogitSpec spec;
  spec.fixed_features = {"dy_before_clv2_sv2", "dy_after_sv1_tfv1"};
  spec.random_features = {"delta_t"};
  spec.include_constant = true;
  spec.draws = 200;
  spec.halton_burn_in = 10;
  return spec;
}

std::pair<int, int> parse_period_pair(const std::string& text) {
  // Format: "<i>s:<j>e" with i, j in 1..4.
  if (text.size() == 5 && text[1] == 's' && text[2] == ':' && text[4] == 'e') {
    const int i = text[0] - '0';
    const int j = text[3] - '0';
    if (i >= 1 && i <= 4 && j >= 1 && j <= 4) return {i, j};
  }
  fail(ErrorKind::parse, "period pair must look like '1s:1e', got '" + text + "'");
}

std::string period_pair_name(int before_period, int after_period) {
  return std::to_string(before_period) + "s:" + std::to_string(after_period) + "e";
}

namespace {

std::string cell_name(int i, int j) {
  return "T" + std::to_string(i) + "s_vs_T" + std::to_string(j) + "e";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
  const std::string text = read_text_file(path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }

  PipelineConfig config;
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    fs::path candidate(p);
    return candidate.is_absolute() ? p : (base / candidate).string();
  };

  if (doc.contains("input")) {
    const auto& in = doc.at("input");
    InputSpec& input = config.input;
    input.recording_dir = resolve(in.value("recording_dir", std::string{}));
    input.tracks_path = resolve(in.value("tracks", std::string{}));
    input.tracks_meta_path = resolve(in.value("tracks_meta", std::string{}));
    input.recording_meta_path = resolve(in.value("recording_meta", std::string{}));
    input.synthetic_spec_path = resolve(in.value("synthetic_spec", std::string{}));
    if (in.contains("column_map")) {
      for (const auto& [logical, physical] : in.at("column_map").items()) {
        input.column_overrides[logical] = physical.get<std::string>();
      }
    }
  }
  config.out_dir = resolve(doc.value("out_dir", std::string("out")));
  config.seed = doc.value("seed", std::uint64_t{1});

  if (doc.contains("mining")) {
    const auto& m = doc.at("mining");
    config.mining.max_interval = m.value("max_interval", 9.0);
    config.mining.require_sv2_behind_sv1 = m.value("require_sv2_behind_sv1", false);
  }
  if (doc.contains("utility")) {
    const auto& u = doc.at("utility");
    config.utility.ttc_threshold = u.value("ttc_threshold", 4.0);
    config.utility.min_coverage = u.value("min_coverage", 0.8);
    config.utility.anchor_sv1_on_own_event = u.value("anchor_sv1_on_own_event", true);
  }
  if (doc.contains("period_pair")) {
    std::tie(config.before_period, config.after_period) =
        parse_period_pair(doc.at("period_pair").get<std::string>());
  }
  if (doc.contains("logit")) {
    const auto& l = doc.at("logit");
    if (l.contains("fixed_features")) {
      config.logit.fixed_features = l.at("fixed_features").get<std::vector<std::string>>();
    }
    if (l.contains("random_features")) {
      config.logit.random_features = l.at("random_features").get<std::vector<std::string>>();
    }
    config.logit.include_constant = l.value("include_constant", true);
    config.logit.draws = l.value("draws", std::size_t{200});
    config.logit.halton_burn_in = l.value("halton_burn_in", std::size_t{10});
  }
  if (doc.contains("classifiers")) {
    const auto& c = doc.at("classifiers");
    config.classifiers.train_fraction = c.value("train_fraction", 0.8);
    if (c.contains("models")) {
      config.classifiers.models = c.at("models").get<std::vector<std::string>>();
    }
    if (c.contains("forest")) {
      const auto& f = c.at("forest");
      config.classifiers.forest.n_trees = f.value("n_trees", 100);
      config.classifiers.forest.feature_subset = f.value("feature_subset", 0);
      config.classifiers.forest.bootstrap = f.value("bootstrap", true);
    }
    if (c.contains("tree")) {
      const auto& t = c.at("tree");
      config.classifiers.tree.max_depth = t.value("max_depth", -1);
      config.classifiers.tree.min_samples_split = t.value("min_samples_split", 2);
    }
    if (c.contains("svm")) {
      const auto& s = c.at("svm");
      config.classifiers.svm.cost = s.value("cost", 1.0);
      config.classifiers.svm.gamma = s.value("gamma", 0.0);
    }
  }
  return config;
}

void validate_pipeline_config(const PipelineConfig& config) {
  if (!(config.mining.max_interval > 0)) {
    fail(ErrorKind::parameter, "max_interval must be positive");
  }
  if (config.utility.ttc_threshold < 1.5 || config.utility.ttc_threshold > 4.0) {
    fail(ErrorKind::parameter, "ttc_threshold must lie in [1.5, 4] seconds");
  }
  if (!(config.utility.min_coverage > 0) || config.utility.min_coverage > 1.0) {
    fail(ErrorKind::parameter, "min_coverage must lie in (0, 1]");
  }
  if (!(config.classifiers.train_fraction > 0) || !(config.classifiers.train_fraction < 1)) {
    fail(ErrorKind::parameter, "train_fraction must lie in (0, 1)");
  }
  if (config.logit.draws < 1) fail(ErrorKind::parameter, "draws must be >= 1");
  if (config.classifiers.forest.n_trees < 1) {
    fail(ErrorKind::parameter, "forest size must be >= 1");
  }
}

Recording resolve_input(const InputSpec& input, const std::string& out_dir,
                        std::uint64_t seed) {
  LoadOptions options;
  for (const auto& [logical, physical] : input.column_overrides) {
    if (!options.column_map.count(logical)) {
      fail(ErrorKind::schema, "column map: unknown logical column '" + logical + "'");
    }
    options.column_map[logical] = physical;
  }
  if (input.is_synthetic()) {
    const ScenarioScript script = load_script(input.synthetic_spec_path);
    const SyntheticResult generated = generate_synthetic(script, seed);
    const std::string rec_dir = (fs::path(out_dir) / "recording").string();
    write_recording_dir(generated.recording, rec_dir);
    const RecordingPaths paths = locate_recording(rec_dir);
    return load_recording(paths.tracks, paths.tracks_meta, paths.recording_meta).recording;
  }
  if (!input.recording_dir.empty()) {
    const RecordingPaths paths = locate_recording(input.recording_dir);
    return load_recording(paths.tracks, paths.tracks_meta, paths.recording_meta, options)
        .recording;
  }
  if (!input.tracks_path.empty()) {
    return load_recording(input.tracks_path, input.tracks_meta_path,
                          input.recording_meta_path, options)
        .recording;
  }
  fail(ErrorKind::parameter, "no input recording configured");
}

void stage_detect(const Recording& recording, const std::string& out_dir,
                  DetectionDiagnostics* diagnostics) {
  fs::create_directories(out_dir);
  const auto events = detect_recording(recording, diagnostics);
  write_events_csv(events, (fs::path(out_dir) / "events.csv").string());
}

void stage_mine(const Recording& recording, const std::string& out_dir,
                const MiningOptions& options) {
  const auto events = read_events_csv((fs::path(out_dir) / "events.csv").string());
  std::vector<LaneChangeEvent> inward;
  for (const auto& e : events) {
    if (e.direction == ChangeDirection::inward) inward.push_back(e);
  }
  const auto scenarios = mine_consecutive(recording, inward, options);
  write_scenarios_csv(scenarios, (fs::path(out_dir) / "scenarios.csv").string());
}

void stage_analyze(const Recording& recording, const std::string& out_dir,
                   const UtilityOptions& options, int before_period, int after_period) {
  const auto scenarios =
      read_scenarios_csv((fs::path(out_dir) / "scenarios.csv").string());
  const auto records = utility_records(recording, scenarios, options);
  write_records_csv(records, (fs::path(out_dir) / "utility_records.csv").string());

  ordered_json report;
  report["format_version"] = kBundleFormat;
  for (const char* measure : kMeasureNames) {
    const ComparisonMatrix matrix = comparison_matrix(records, measure);
    write_matrix_csv(matrix,
                     (fs::path(out_dir) / ("matrix_" + std::string(measure) + ".csv")).string());
    ordered_json cells;
    for (int i = 1; i <= 4; ++i) {
      for (int j = 1; j <= 4; ++j) {
        const MatrixCell& cell = matrix.cells[i - 1][j - 1];
        ordered_json jcell;
        jcell["n"] = cell.n;
        if (cell.proportion_positive) {
          jcell["proportion_positive"] = *cell.proportion_positive;
        } else {
          jcell["proportion_positive"] = nullptr;
        }
        if (cell.mean) {
          jcell["mean"] = *cell.mean;
        } else {
          jcell["mean"] = nullptr;
        }
        cells[cell_name(i, j)] = jcell;
      }
    }
    report["measures"][measure] = cells;
  }
  write_text_file((fs::path(out_dir) / "comparison_report.json").string(), report.dump(2));

  const RiskTable risk = risk_table(recording, scenarios, options.ttc_threshold);
  write_risk_csv(risk, (fs::path(out_dir) / "risk_table.csv").string());
  ordered_json jrisk;
  jrisk["format_version"] = kBundleFormat;
  jrisk["ttc_threshold"] = options.ttc_threshold;
  jrisk["scenarios"] = risk.scenario_count;
  auto risk_row = [](const RiskRow& r) {
    return ordered_json{{"clv", r.clv}, {"tlv", r.tlv}, {"tfv", r.tfv}, {"vehicle_group", r.group}};
  };
  jrisk["SV1"] = risk_row(risk.sv1);
  jrisk["SV2"] = risk_row(risk.sv2);
  write_text_file((fs::path(out_dir) / "risk_table.json").string(), jrisk.dump(2));

  const auto features =
      extract_features(recording, scenarios, before_period, after_period, options);
  write_features_csv(features, (fs::path(out_dir) / "features.csv").string());
}

namespace {

/// Complete feature rows as a model dataset (shared by fit and predict).
std::pair<std::vector<std::string>, std::vector<ScenarioFeatures>> load_complete_features(
    const std::string& out_dir) {
  const auto rows = read_features_csv((fs::path(out_dir) / "features.csv").string());
  std::vector<ScenarioFeatures> complete;
  for (const auto& row : rows) {
    if (row.complete()) complete.push_back(row);
  }
  std::vector<std::string> names(kModelFeatureNames.begin(), kModelFeatureNames.end());
  return {names, complete};
}

}  // namespace

void stage_fit(const std::string& out_dir, const LogitSpec& spec, int before_period,
               int after_period) {
  auto [names, rows] = load_complete_features(out_dir);
  if (rows.size() < 4) {
    fail(ErrorKind::precondition, "too few complete feature rows to fit a model (" +
                                      std::to_string(rows.size()) + ")");
  }
  ChoiceDataset data;
  data.feature_names = names;
  for (const auto& row : rows) {
    std::vector<double> x;
    for (const auto& f : row.features) x.push_back(*f);
    data.x.push_back(std::move(x));
    data.y.push_back(*row.y);
  }

  const LogitFit fit = estimate(data, spec);
  const auto effects = marginal_effects(fit, data, spec);

  ordered_json doc;
  doc["format_version"] = kBundleFormat;
  doc["period_pair"] = period_pair_name(before_period, after_period);
  doc["n_observations"] = data.size();
  doc["draws"] = spec.draws;
  doc["converged"] = fit.converged;
  doc["iterations"] = fit.iterations;
  ordered_json estimates = ordered_json::array();
  for (const ParameterEstimate& est : fit.estimates) {
    const char* kind = est.kind == ParameterKind::fixed        ? "fixed"
                       : est.kind == ParameterKind::random_mean ? "random_mean"
                       : est.kind == ParameterKind::constant    ? "constant"
                                                                : "random_sd";
    estimates.push_back(ordered_json{{"name", est.name},
                                     {"kind", kind},
                                     {"estimate", est.value},
                                     {"std_error", est.std_error}});
  }
  doc["estimates"] = estimates;
  doc["log_likelihood"] =
      ordered_json{{"convergence", fit.ll_converged}, {"constant_only", fit.ll_constant}};
  doc["rho_squared"] = fit.rho2;
  ordered_json shares = ordered_json::array();
  for (std::size_t k = 0; k < fit.estimates.size(); ++k) {
    const auto& est = fit.estimates[k];
    if (est.kind != ParameterKind::random_mean) continue;
    // Matching sd parameter carries the same feature name.
    for (const auto& sd_est : fit.estimates) {
      if (sd_est.kind == ParameterKind::random_sd && sd_est.name == "sd(" + est.name + ")" &&
          sd_est.value > 0) {
        shares.push_back(ordered_json{{"name", est.name},
                                      {"positive_share", positive_share(est.value, sd_est.value)}});
      }
    }
  }
  doc["positive_shares"] = shares;
  doc["warnings"] = fit.warnings;
  write_text_file((fs::path(out_dir) / "logit_fit.json").string(), doc.dump(2));

  CsvWriter w((fs::path(out_dir) / "marginal_effects.csv").string());
  w.write_header({"variable", "marginal_effect", "random_parameter"});
  for (const MarginalEffect& e : effects) {
    w.begin_row();
    w.add(e.name);
    w.add(e.value);
    w.add(e.random ? 1 : 0);
    w.end_row();
  }
}

void stage_predict(const std::string& out_dir, const ClassifierOptions& options,
                   std::uint64_t seed) {
  auto [names, rows] = load_complete_features(out_dir);
  if (rows.size() < 5) {
    fail(ErrorKind::precondition, "too few complete feature rows to train classifiers (" +
                                      std::to_string(rows.size()) + ")");
  }
  LabeledSet all;
  all.feature_names = names;
  for (const auto& row : rows) {
    std::vector<double> x;
    for (const auto& f : row.features) x.push_back(*f);
    all.x.push_back(std::move(x));
    all.y.push_back(*row.y);
  }

  auto [train_raw, test_raw] = split_train_test(all, options.train_fraction, seed);
  const Standardizer scaler = Standardizer::fit(train_raw);
  const LabeledSet train = scaler.apply(train_raw);
  const LabeledSet test = scaler.apply(test_raw);

  ordered_json report;
  report["format_version"] = kBundleFormat;
  report["split"] = ordered_json{{"train", train.size()}, {"test", test.size()}, {"seed", seed}};
  ordered_json scaler_doc;
  scaler_doc["mean"] = scaler.mean;
  scaler_doc["sd"] = scaler.sd;
  scaler_doc["features"] = names;
  report["standardizer"] = scaler_doc;

  CsvWriter csv((fs::path(out_dir) / "classifier_report.csv").string());
  csv.write_header({"model", "split", "accuracy", "precision", "recall", "f1", "auc"});
  auto add_report = [&](const std::string& model, const std::string& split,
                        const EvalReport& r) {
    csv.begin_row();
    csv.add(model);
    csv.add(split);
    csv.add(r.accuracy);
    csv.add(r.precision);
    csv.add(r.recall);
    csv.add(r.f1);
    csv.add(r.auc);
    csv.end_row();
    ordered_json jr;
    jr["accuracy"] = r.accuracy;
    jr["precision"] = r.precision;
    jr["recall"] = r.recall;
    jr["f1"] = r.f1;
    jr["auc"] = r.auc;
    jr["confusion"] = ordered_json::array(
        {ordered_json::array({r.confusion[0][0], r.confusion[0][1]}),
         ordered_json::array({r.confusion[1][0], r.confusion[1][1]})});
    return jr;
  };
  auto write_roc = [&](const std::string& model, const EvalReport& r) {
    CsvWriter w((fs::path(out_dir) / ("roc_" + model + ".csv")).string());
    w.write_header({"fpr", "tpr"});
    for (const auto& [fpr, tpr] : r.roc) {
      w.begin_row();
      w.add(fpr);
      w.add(tpr);
      w.end_row();
    }
  };
  auto wants = [&](const std::string& model) {
    return std::find(options.models.begin(), options.models.end(), model) !=
           options.models.end();
  };

  if (wants("dt")) {
    const TreeModel dt = train_tree(train, options.tree);
    const EvalReport on_train = evaluate_model(dt, train);
    const EvalReport on_test = evaluate_model(dt, test);
    report["models"]["dt"] =
        ordered_json{{"train", add_report("dt", "train", on_train)},
                     {"test", add_report("dt", "test", on_test)}};
    write_roc("dt", on_test);
    write_text_file((fs::path(out_dir) / "model_dt.json").string(), tree_to_json(dt));
  }
  if (wants("rf")) {
    ForestConfig forest_config = options.forest;
    forest_config.seed = seed;
    const ForestModel rf = train_forest(train, forest_config);
    const EvalReport on_train = evaluate_model(rf, train);
    const EvalReport on_test = evaluate_model(rf, test);
    report["models"]["rf"] =
        ordered_json{{"train", add_report("rf", "train", on_train)},
                     {"test", add_report("rf", "test", on_test)}};
    write_roc("rf", on_test);
    write_text_file((fs::path(out_dir) / "model_rf.json").string(), forest_to_json(rf));

    const auto importance = feature_importance(rf, train.feature_names);
    CsvWriter w((fs::path(out_dir) / "feature_importance.csv").string());
    w.write_header({"feature", "importance_mean", "importance_sd"});
    for (const ImportanceEntry& e : importance) {
      w.begin_row();
      w.add(e.feature);
      w.add(e.mean);
      w.add(e.sd);
      w.end_row();
    }
  }
  if (wants("svm")) {
    const SvmModel svm = train_svm(train, options.svm);
    const EvalReport on_train = evaluate_model(svm, train);
    const EvalReport on_test = evaluate_model(svm, test);
    report["models"]["svm"] =
        ordered_json{{"train", add_report("svm", "train", on_train)},
                     {"test", add_report("svm", "test", on_test)}};
    write_roc("svm", on_test);
    write_text_file((fs::path(out_dir) / "model_svm.json").string(), svm_to_json(svm));
  }

  write_text_file((fs::path(out_dir) / "classifier_report.json").string(), report.dump(2));
}

namespace {

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::vector<std::string> stage_outputs(const std::string& stage) {
  if (stage == "detect") return {"events.csv"};
  if (stage == "mine") return {"scenarios.csv"};
  if (stage == "analyze") {
    std::vector<std::string> out = {"utility_records.csv", "comparison_report.json",
                                    "risk_table.csv", "risk_table.json", "features.csv"};
    for (const char* m : kMeasureNames) out.push_back("matrix_" + std::string(m) + ".csv");
    return out;
  }
  if (stage == "fit") return {"logit_fit.json", "marginal_effects.csv"};
  if (stage == "predict") {
    return {"classifier_report.json", "classifier_report.csv", "feature_importance.csv",
            "roc_dt.csv",  "roc_rf.csv",  "roc_svm.csv",
            "model_dt.json", "model_rf.json", "model_svm.json"};
  }
  return {};
}

std::size_t csv_row_count(const std::string& path) {
  return CsvTable::read_file(path).row_count();
}

}  // namespace

void run_pipeline(const PipelineConfig& config) {
  validate_pipeline_config(config);
  fs::create_directories(config.out_dir);
  const fs::path out(config.out_dir);

  ordered_json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  manifest["bundle_format"] = kBundleFormat;
  manifest["generated_at"] = iso_timestamp();
  {
    // Fingerprint of the effective options, so reruns are attributable.
    std::ostringstream key;
    key << config.seed << '|' << config.mining.max_interval << '|'
        << config.mining.require_sv2_behind_sv1 << '|' << config.utility.ttc_threshold << '|'
        << config.utility.min_coverage << '|' << config.utility.anchor_sv1_on_own_event << '|'
        << config.before_period << ':' << config.after_period << '|' << config.logit.draws;
    for (const auto& f : config.logit.fixed_features) key << '|' << f;
    for (const auto& f : config.logit.random_features) key << '|' << f;
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(key.str())));
    manifest["config_hash"] = hex;
  }
  manifest["seed"] = config.seed;
  manifest["period_pair"] = period_pair_name(config.before_period, config.after_period);
  manifest["options"] = ordered_json{
      {"max_interval", config.mining.max_interval},
      {"require_sv2_behind_sv1", config.mining.require_sv2_behind_sv1},
      {"ttc_threshold", config.utility.ttc_threshold},
      {"min_coverage", config.utility.min_coverage},
      {"anchor_sv1_on_own_event", config.utility.anchor_sv1_on_own_event},
      {"draws", config.logit.draws},
      {"train_fraction", config.classifiers.train_fraction},
      {"forest_trees", config.classifiers.forest.n_trees}};

  const std::vector<std::string> stage_order = {"ingest", "detect", "mine",
                                                "analyze", "fit",    "predict"};
  ordered_json stages = ordered_json::array();
  ordered_json counts;

  Recording recording;
  DetectionDiagnostics diag;
  std::string failed_stage;
  std::string failure_message;

  for (const std::string& stage : stage_order) {
    try {
      if (stage == "ingest") {
        recording = resolve_input(config.input, config.out_dir, config.seed);
        counts["tracks"] = recording.tracks.size();
      } else if (stage == "detect") {
        stage_detect(recording, config.out_dir, &diag);
        const auto events = read_events_csv((out / "events.csv").string());
        std::size_t inward = 0;
        for (const auto& e : events) {
          if (e.direction == ChangeDirection::inward) ++inward;
        }
        counts["events_inward"] = inward;
        counts["events_outward"] = events.size() - inward;
        counts["events_discarded_incomplete"] = diag.discarded_incomplete;
        counts["events_discarded_sweep"] = diag.discarded_sweep;
        counts["events_overlapping"] = diag.overlapping;
      } else if (stage == "mine") {
        stage_mine(recording, config.out_dir, config.mining);
        counts["scenarios"] = csv_row_count((out / "scenarios.csv").string());
      } else if (stage == "analyze") {
        stage_analyze(recording, config.out_dir, config.utility, config.before_period,
                      config.after_period);
        counts["utility_records"] = csv_row_count((out / "utility_records.csv").string());
        const auto features = read_features_csv((out / "features.csv").string());
        std::size_t complete = 0;
        for (const auto& row : features) {
          if (row.complete()) ++complete;
        }
        counts["feature_rows"] = features.size();
        counts["feature_rows_complete"] = complete;
      } else if (stage == "fit") {
        stage_fit(config.out_dir, config.logit, config.before_period, config.after_period);
      } else if (stage == "predict") {
        stage_predict(config.out_dir, config.classifiers, config.seed);
        const auto report = nlohmann::json::parse(
            read_text_file((out / "classifier_report.json").string()));
        counts["train"] = report.at("split").at("train").get<std::size_t>();
        counts["test"] = report.at("split").at("test").get<std::size_t>();
      }
      stages.push_back(ordered_json{{"name", stage}, {"status", "ok"}});
    } catch (const std::exception& e) {
      failed_stage = stage;
      failure_message = e.what();
      stages.push_back(
          ordered_json{{"name", stage}, {"status", "failed"}, {"error", failure_message}});
      // Remove this stage's partial outputs so the bundle holds no
      // half-written files.
      for (const std::string& name : stage_outputs(stage)) {
        std::error_code ec;
        fs::remove(out / name, ec);
      }
      break;
    }
  }
  for (std::size_t k = stages.size(); k < stage_order.size(); ++k) {
    stages.push_back(ordered_json{{"name", stage_order[k]}, {"status", "not_run"}});
  }
  manifest["stages"] = stages;
  manifest["counts"] = counts;
  write_text_file((out / "manifest.json").string(), manifest.dump(2));

  if (!failed_stage.empty()) {
    fail(ErrorKind::io, "stage " + failed_stage + " failed: " + failure_message);
  }
}

}  // namespace lcmine
