#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcmine/error.hpp"

namespace lcmine {

struct LabeledSet {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> x;
  std::vector<int> y;  // 0/1

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return feature_names.size(); }
  void validate() const;
};

/// Per-feature affine standardizer fitted on the training split only.
/// Constant features pass through unscaled.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;

  static Standardizer fit(const LabeledSet& train);
  LabeledSet apply(const LabeledSet& data) const;
  std::vector<double> apply_row(std::span<const double> row) const;
  std::vector<double> invert_row(std::span<const double> row) const;
};

/// Uniform shuffle split; train gets floor(train_fraction * n) rows.
std::pair<LabeledSet, LabeledSet> split_train_test(const LabeledSet& data,
                                                   double train_fraction, std::uint64_t seed);

/// Impurity of a class-proportion simplex: sum p*(1-p).
double gini(std::span<const double> class_proportions);

struct TreeConfig {
  int max_depth = -1;  // -1: unlimited
  int min_samples_split = 2;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<double, 2> class_counts{};  // weighted sample counts per class

  bool is_leaf() const { return feature < 0; }
  double total() const { return class_counts[0] + class_counts[1]; }
  double impurity() const;
  double positive_fraction() const;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int predict(std::span<const double> row) const;
  /// Leaf proportion of the positive class, used as the ROC score.
  double score(std::span<const double> row) const;
};

/// Greedy recursive binary splitting on midpoint thresholds, minimizing
/// weighted child impurity; ties break on the lowest feature index, then
/// the lowest threshold. Impure nodes keep splitting while any feature
/// still varies, so consistent training data is always fit exactly.
TreeModel train_tree(const LabeledSet& train, const TreeConfig& config = {});

struct ForestConfig {
  int n_trees = 100;
  /// Features considered per node; 0 means floor(sqrt(d)).
  int feature_subset = 0;
  std::uint64_t seed = 0;
  bool bootstrap = true;
  TreeConfig tree;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> tree_seeds;
  ForestConfig config;
  std::size_t n_features = 0;

  /// Majority vote; exact ties fall back to the averaged leaf proportions.
  int predict(std::span<const double> row) const;
  /// Fraction of trees voting for the positive class.
  double score(std::span<const double> row) const;
};

ForestModel train_forest(const LabeledSet& train, const ForestConfig& config = {});

struct ImportanceEntry {
  std::string feature;
  double mean = 0.0;
  double sd = 0.0;
};

/// Impurity-decrease importances, normalized to sum 1 per tree, reported
/// as across-tree mean +- sd, sorted descending by mean.
std::vector<ImportanceEntry> feature_importance(const ForestModel& forest,
                                                const std::vector<std::string>& names);

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

struct SvmConfig {
  double cost = 1.0;
  double gamma = 0.0;  // <=0 means 1/d
  double tolerance = 1e-3;
  int max_passes = 200;
};

struct SvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefs;  // alpha_i * y_i, y in {-1,+1}
  double bias = 0.0;
  double gamma = 0.0;
  double cost = 0.0;

  double decision(std::span<const double> row) const;
  int predict(std::span<const double> row) const { return decision(row) > 0 ? 1 : 0; }
  /// Signed decision value doubles as the ROC score.
  double score(std::span<const double> row) const { return decision(row); }
};

/// Soft-margin RBF SVM solved by sequential pairwise (SMO-style)
/// optimization until KKT violations fall below the tolerance.
/// Deterministic given the data order.
SvmModel train_svm(const LabeledSet& train, const SvmConfig& config = {});

struct GridSearchResult {
  double cost = 1.0;
  double gamma = 0.0;
  double cv_accuracy = 0.0;
};

/// Small deterministic k-fold grid search helper for (C, gamma).
GridSearchResult svm_grid_search(const LabeledSet& train, std::span<const double> costs,
                                 std::span<const double> gammas, int folds = 5);

struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;  // support-weighted
  double recall = 0.0;     // support-weighted (equals accuracy)
  double f1 = 0.0;         // support-weighted
  std::array<std::array<int, 2>, 2> confusion{};  // [actual][predicted]
  std::vector<std::pair<double, double>> roc;     // (fpr, tpr)
  double auc = 0.0;
  int evaluated = 0;
};

/// Metrics from per-row predictions and ranking scores.
EvalReport evaluate(const std::vector<int>& predictions, const std::vector<double>& scores,
                    const std::vector<int>& labels);

template <typename Model>
EvalReport evaluate_model(const Model& model, const LabeledSet& test) {
  std::vector<int> predictions;
  std::vector<double> scores;
  predictions.reserve(test.size());
  scores.reserve(test.size());
  for (const auto& row : test.x) {
    predictions.push_back(model.predict(row));
    scores.push_back(model.score(row));
  }
  return evaluate(predictions, scores, test.y);
}

// Versioned JSON serialization for trained models.
std::string tree_to_json(const TreeModel& model);
TreeModel tree_from_json(const std::string& text);
std::string forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const std::string& text);
std::string svm_to_json(const SvmModel& model);
SvmModel svm_from_json(const std::string& text);

}  // namespace lcmine
