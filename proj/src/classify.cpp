#include "lcmine/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "lcmine/mathutil.hpp"

namespace lcmine {

using nlohmann::json;

void LabeledSet::validate() const {
  if (x.size() != y.size()) {
    fail(ErrorKind::integrity, "labeled set: rows and labels differ in length");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != feature_names.size()) {
      fail(ErrorKind::integrity, "labeled set: row " + std::to_string(i) +
                                     " has wrong feature count");
    }
    if (y[i] != 0 && y[i] != 1) {
      fail(ErrorKind::integrity, "labeled set: labels must be 0/1");
    }
  }
}

Standardizer Standardizer::fit(const LabeledSet& train) {
  train.validate();
  const std::size_t d = train.dim();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.sd.assign(d, 1.0);
  if (train.size() == 0) return s;
  for (const auto& row : train.x) {
    for (std::size_t k = 0; k < d; ++k) s.mean[k] += row[k];
  }
  for (std::size_t k = 0; k < d; ++k) s.mean[k] /= static_cast<double>(train.size());
  std::vector<double> ss(d, 0.0);
  for (const auto& row : train.x) {
    for (std::size_t k = 0; k < d; ++k) {
      const double c = row[k] - s.mean[k];
      ss[k] += c * c;
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    const double variance = ss[k] / static_cast<double>(train.size());
    s.sd[k] = variance > 0 ? std::sqrt(variance) : 1.0;  // constant feature: pass through
  }
  return s;
}

std::vector<double> Standardizer::apply_row(std::span<const double> row) const {
  std::vector<double> out(row.size());
  for (std::size_t k = 0; k < row.size(); ++k) out[k] = (row[k] - mean[k]) / sd[k];
  return out;
}

std::vector<double> Standardizer::invert_row(std::span<const double> row) const {
  std::vector<double> out(row.size());
  for (std::size_t k = 0; k < row.size(); ++k) out[k] = row[k] * sd[k] + mean[k];
  return out;
}

LabeledSet Standardizer::apply(const LabeledSet& data) const {
  LabeledSet out;
  out.feature_names = data.feature_names;
  out.y = data.y;
  out.x.reserve(data.x.size());
  for (const auto& row : data.x) out.x.push_back(apply_row(row));
  return out;
}

std::pair<LabeledSet, LabeledSet> split_train_test(const LabeledSet& data,
                                                   double train_fraction, std::uint64_t seed) {
  data.validate();
  if (data.size() == 0) fail(ErrorKind::precondition, "cannot split an empty dataset");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorKind::parameter, "train fraction must lie in (0,1)");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle_indices(order, rng);

  const auto train_size = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(data.size())));
  LabeledSet train, test;
  train.feature_names = data.feature_names;
  test.feature_names = data.feature_names;
  for (std::size_t k = 0; k < order.size(); ++k) {
    LabeledSet& dst = k < train_size ? train : test;
    dst.x.push_back(data.x[order[k]]);
    dst.y.push_back(data.y[order[k]]);
  }
  return {std::move(train), std::move(test)};
}

double gini(std::span<const double> class_proportions) {
  double sum = 0.0;
  double impurity = 0.0;
  for (double p : class_proportions) {
    if (p < -1e-12) fail(ErrorKind::parameter, "gini: proportions must be nonnegative");
    sum += p;
    impurity += p * (1.0 - p);
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorKind::parameter, "gini: proportions must sum to 1");
  }
  return impurity;
}

double TreeNode::impurity() const {
  const double n = total();
  if (n <= 0) return 0.0;
  const double p0 = class_counts[0] / n;
  const double p1 = class_counts[1] / n;
  return p0 * (1.0 - p0) + p1 * (1.0 - p1);
}

double TreeNode::positive_fraction() const {
  const double n = total();
  return n > 0 ? class_counts[1] / n : 0.0;
}

int TreeModel::predict(std::span<const double> row) const {
  return score(row) > 0.5 ? 1 : 0;
}

double TreeModel::score(std::span<const double> row) const {
  int node = 0;
  while (!nodes[node].is_leaf()) {
    node = row[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                             : nodes[node].right;
  }
  return nodes[node].positive_fraction();
}

namespace {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double weighted_impurity = 0.0;
};

/// Best split over the given candidate features by exhaustive midpoint
/// scan. Total tie-break: impurity, then feature index, then threshold.
SplitChoice best_split(const LabeledSet& data, const std::vector<std::size_t>& rows,
                       const std::vector<int>& features) {
  SplitChoice best;
  const double n = static_cast<double>(rows.size());
  std::vector<std::pair<double, int>> values;
  values.reserve(rows.size());
  for (int feature : features) {
    values.clear();
    for (std::size_t r : rows) {
      values.emplace_back(data.x[r][feature], data.y[r]);
    }
    std::sort(values.begin(), values.end());
    if (values.front().first == values.back().first) continue;  // constant here

    double left0 = 0.0, left1 = 0.0;
    double total1 = 0.0;
    for (const auto& [v, label] : values) total1 += label;
    const double total0 = n - total1;

    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      left0 += values[k].second == 0 ? 1.0 : 0.0;
      left1 += values[k].second == 1 ? 1.0 : 0.0;
      if (values[k].first == values[k + 1].first) continue;
      const double threshold = values[k].first + 0.5 * (values[k + 1].first - values[k].first);
      const double nl = left0 + left1;
      const double nr = n - nl;
      const double r0 = total0 - left0;
      const double r1 = total1 - left1;
      const double gini_l = 1.0 - (left0 * left0 + left1 * left1) / (nl * nl);
      const double gini_r = 1.0 - (r0 * r0 + r1 * r1) / (nr * nr);
      const double weighted = (nl * gini_l + nr * gini_r) / n;
      const bool better =
          !best.found || weighted < best.weighted_impurity - 1e-12 ||
          (std::abs(weighted - best.weighted_impurity) <= 1e-12 &&
           (feature < best.feature ||
            (feature == best.feature && threshold < best.threshold)));
      if (better) {
        best.found = true;
        best.feature = feature;
        best.threshold = threshold;
        best.weighted_impurity = weighted;
      }
    }
  }
  return best;
}

struct TreeBuilder {
  const LabeledSet& data;
  TreeConfig config;
  int feature_subset = 0;  // 0: all features
  Rng* rng = nullptr;
  std::vector<TreeNode> nodes{};

  std::vector<int> candidate_features() {
    const int d = static_cast<int>(data.dim());
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 0);
    if (feature_subset <= 0 || feature_subset >= d || rng == nullptr) return all;
    // Partial Fisher-Yates draw of feature_subset distinct indices, then
    // sorted so the tie-break order stays by feature index.
    for (int k = 0; k < feature_subset; ++k) {
      const auto j = k + static_cast<int>(rng->next_below(d - k));
      std::swap(all[k], all[j]);
    }
    std::vector<int> subset(all.begin(), all.begin() + feature_subset);
    std::sort(subset.begin(), subset.end());
    return subset;
  }

  int build(const std::vector<std::size_t>& rows, int depth) {
    TreeNode node;
    for (std::size_t r : rows) node.class_counts[data.y[r]] += 1.0;
    const int index = static_cast<int>(nodes.size());
    nodes.push_back(node);

    const bool pure = node.class_counts[0] == 0.0 || node.class_counts[1] == 0.0;
    const bool depth_ok = config.max_depth < 0 || depth < config.max_depth;
    if (pure || !depth_ok || rows.size() < static_cast<std::size_t>(config.min_samples_split)) {
      return index;
    }

    SplitChoice split = best_split(data, rows, candidate_features());
    if (!split.found && feature_subset > 0) {
      // The drawn subset was constant on this node; fall back to every
      // feature so consistent data still separates.
      const int d = static_cast<int>(data.dim());
      std::vector<int> all(d);
      std::iota(all.begin(), all.end(), 0);
      split = best_split(data, rows, all);
    }
    if (!split.found) return index;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      (data.x[r][split.feature] <= split.threshold ? left_rows : right_rows).push_back(r);
    }
    nodes[index].feature = split.feature;
    nodes[index].threshold = split.threshold;
    const int left = build(left_rows, depth + 1);
    nodes[index].left = left;
    const int right = build(right_rows, depth + 1);
    nodes[index].right = right;
    return index;
  }
};

std::vector<double> tree_importance(const TreeModel& tree, std::size_t dim) {
  std::vector<double> raw(dim, 0.0);
  const double n_root = tree.nodes.empty() ? 0.0 : tree.nodes[0].total();
  if (n_root <= 0) return raw;
  for (const TreeNode& node : tree.nodes) {
    if (node.is_leaf()) continue;
    const TreeNode& left = tree.nodes[node.left];
    const TreeNode& right = tree.nodes[node.right];
    const double decrease = (node.total() * node.impurity() - left.total() * left.impurity() -
                             right.total() * right.impurity()) /
                            n_root;
    raw[node.feature] += decrease;
  }
  double sum = 0.0;
  for (double v : raw) sum += v;
  if (sum > 0) {
    for (double& v : raw) v /= sum;
  }
  return raw;
}

}  // namespace

TreeModel train_tree(const LabeledSet& train, const TreeConfig& config) {
  train.validate();
  if (train.size() == 0) fail(ErrorKind::precondition, "cannot train a tree on no rows");
  TreeBuilder builder{train, config};
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), 0);
  builder.build(rows, 0);
  TreeModel model;
  model.nodes = std::move(builder.nodes);
  return model;
}

ForestModel train_forest(const LabeledSet& train, const ForestConfig& config) {
  train.validate();
  if (train.size() == 0) fail(ErrorKind::precondition, "cannot train a forest on no rows");
  ForestModel forest;
  forest.config = config;
  forest.n_features = train.dim();
  const int subset = config.feature_subset > 0
                         ? config.feature_subset
                         : std::max(1, static_cast<int>(std::floor(
                                           std::sqrt(static_cast<double>(train.dim())))));

  for (int t = 0; t < config.n_trees; ++t) {
    const std::uint64_t tree_seed =
        fnv1a64(std::to_string(config.seed) + "/tree/" + std::to_string(t));
    forest.tree_seeds.push_back(tree_seed);
    Rng rng(tree_seed);

    std::vector<std::size_t> rows;
    rows.reserve(train.size());
    if (config.bootstrap) {
      for (std::size_t k = 0; k < train.size(); ++k) {
        rows.push_back(static_cast<std::size_t>(rng.next_below(train.size())));
      }
    } else {
      rows.resize(train.size());
      std::iota(rows.begin(), rows.end(), 0);
    }

    TreeBuilder builder{train, config.tree, subset, &rng};
    builder.build(rows, 0);
    TreeModel tree;
    tree.nodes = std::move(builder.nodes);
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

int ForestModel::predict(std::span<const double> row) const {
  int votes1 = 0;
  double proba_sum = 0.0;
  for (const TreeModel& tree : trees) {
    const double p = tree.score(row);
    proba_sum += p;
    if (p > 0.5) ++votes1;
  }
  const int votes0 = static_cast<int>(trees.size()) - votes1;
  if (votes1 != votes0) return votes1 > votes0 ? 1 : 0;
  return proba_sum / static_cast<double>(trees.size()) > 0.5 ? 1 : 0;
}

double ForestModel::score(std::span<const double> row) const {
  if (trees.empty()) return 0.0;
  int votes1 = 0;
  for (const TreeModel& tree : trees) {
    if (tree.score(row) > 0.5) ++votes1;
  }
  return static_cast<double>(votes1) / static_cast<double>(trees.size());
}

std::vector<ImportanceEntry> feature_importance(const ForestModel& forest,
                                                const std::vector<std::string>& names) {
  if (names.size() != forest.n_features) {
    fail(ErrorKind::parameter, "feature name list does not match the forest");
  }
  const std::size_t d = forest.n_features;
  std::vector<std::vector<double>> per_tree;
  per_tree.reserve(forest.trees.size());
  for (const TreeModel& tree : forest.trees) {
    per_tree.push_back(tree_importance(tree, d));
  }
  std::vector<ImportanceEntry> out;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> column;
    column.reserve(per_tree.size());
    for (const auto& imp : per_tree) column.push_back(imp[k]);
    ImportanceEntry entry;
    entry.feature = names[k];
    entry.mean = mean_of(column);
    entry.sd = stddev_of(column);
    out.push_back(std::move(entry));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ImportanceEntry& a, const ImportanceEntry& b) {
                     return a.mean > b.mean;
                   });
  return out;
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  if (a.size() != b.size()) {
    fail(ErrorKind::parameter, "rbf_kernel: dimension mismatch");
  }
  if (gamma < 0) fail(ErrorKind::parameter, "rbf_kernel: gamma must be nonnegative");
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sq += diff * diff;
  }
  return std::exp(-gamma * sq);
}

double SvmModel::decision(std::span<const double> row) const {
  double sum = bias;
  for (std::size_t k = 0; k < support_vectors.size(); ++k) {
    sum += dual_coefs[k] * rbf_kernel(support_vectors[k], row, gamma);
  }
  return sum;
}

SvmModel train_svm(const LabeledSet& train, const SvmConfig& config) {
  train.validate();
  const std::size_t n = train.size();
  if (n == 0) fail(ErrorKind::precondition, "cannot train an SVM on no rows");
  bool has0 = false, has1 = false;
  for (int label : train.y) (label == 1 ? has1 : has0) = true;
  if (!has0 || !has1) {
    fail(ErrorKind::precondition, "SVM training requires both classes");
  }

  const double C = config.cost;
  const double gamma = config.gamma > 0
                           ? config.gamma
                           : 1.0 / static_cast<double>(std::max<std::size_t>(1, train.dim()));
  const double tol = config.tolerance;

  std::vector<double> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = train.y[i] == 1 ? 1.0 : -1.0;

  // Dense kernel matrix; training sets here are small (hundreds of rows).
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = rbf_kernel(train.x[i], train.x[j], gamma);
      K[i * n + j] = v;
      K[j * n + i] = v;
    }
  }

  std::vector<double> alpha(n, 0.0);
  double b = 0.0;
  // With all alphas at zero the decision function is identically zero, so
  // the initial error is just -y_i. Updates below keep the cache exact.
  std::vector<double> errors(n);
  for (std::size_t i = 0; i < n; ++i) errors[i] = -label[i];

  auto take_step = [&](std::size_t i, std::size_t j) -> bool {
    if (i == j) return false;
    const double ai_old = alpha[i];
    const double aj_old = alpha[j];
    const double yi = label[i], yj = label[j];
    double lo, hi;
    if (yi != yj) {
      lo = std::max(0.0, aj_old - ai_old);
      hi = std::min(C, C + aj_old - ai_old);
    } else {
      lo = std::max(0.0, ai_old + aj_old - C);
      hi = std::min(C, ai_old + aj_old);
    }
    if (lo >= hi) return false;
    const double eta = 2.0 * K[i * n + j] - K[i * n + i] - K[j * n + j];
    if (eta >= 0) return false;  // non-positive curvature along the pair
    double aj = aj_old - yj * (errors[i] - errors[j]) / eta;
    aj = std::clamp(aj, lo, hi);
    if (std::abs(aj - aj_old) < 1e-5 * (aj + aj_old + 1e-5)) return false;
    const double ai = ai_old + yi * yj * (aj_old - aj);

    const double b1 = b - errors[i] - yi * (ai - ai_old) * K[i * n + i] -
                      yj * (aj - aj_old) * K[i * n + j];
    const double b2 = b - errors[j] - yi * (ai - ai_old) * K[i * n + j] -
                      yj * (aj - aj_old) * K[j * n + j];
    double b_new;
    if (ai > 0 && ai < C) {
      b_new = b1;
    } else if (aj > 0 && aj < C) {
      b_new = b2;
    } else {
      b_new = 0.5 * (b1 + b2);
    }
    const double di = yi * (ai - ai_old);
    const double dj = yj * (aj - aj_old);
    const double db = b_new - b;
    for (std::size_t k = 0; k < n; ++k) {
      errors[k] += di * K[i * n + k] + dj * K[j * n + k] + db;
    }
    alpha[i] = ai;
    alpha[j] = aj;
    b = b_new;
    return true;
  };

  auto examine = [&](std::size_t i) -> bool {
    const double ei = errors[i];
    const double ri = label[i] * ei;
    const bool violates = (ri < -tol && alpha[i] < C) || (ri > tol && alpha[i] > 0);
    if (!violates) return false;
    // Second-choice heuristic: maximize |E_i - E_j|, deterministic sweep
    // as fallback.
    std::size_t best = i;
    double best_gap = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !(alpha[j] > 0 && alpha[j] < C)) continue;
      const double gap = std::abs(ei - errors[j]);
      if (gap > best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    if (best != i && take_step(i, best)) return true;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && alpha[j] > 0 && alpha[j] < C && take_step(i, j)) return true;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && take_step(i, j)) return true;
    }
    return false;
  };

  // Platt's outer loop: full sweeps alternating with non-bound sweeps.
  bool examine_all = true;
  int changed = 0;
  for (int pass = 0; pass < config.max_passes; ++pass) {
    changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!examine_all && !(alpha[i] > 0 && alpha[i] < C)) continue;
      if (examine(i)) ++changed;
    }
    if (examine_all) {
      if (changed == 0) break;
      examine_all = false;
    } else if (changed == 0) {
      examine_all = true;
    }
  }

  SvmModel model;
  model.gamma = gamma;
  model.cost = C;
  model.bias = b;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] > 1e-12) {
      model.support_vectors.push_back(train.x[i]);
      model.dual_coefs.push_back(alpha[i] * label[i]);
    }
  }
  return model;
}

GridSearchResult svm_grid_search(const LabeledSet& train, std::span<const double> costs,
                                 std::span<const double> gammas, int folds) {
  train.validate();
  if (costs.empty() || gammas.empty()) {
    fail(ErrorKind::parameter, "grid search needs at least one C and one gamma");
  }
  folds = std::min<int>(folds, static_cast<int>(train.size()));
  if (folds < 2) fail(ErrorKind::parameter, "grid search needs at least 2 folds");

  GridSearchResult best;
  best.cv_accuracy = -1.0;
  for (double cost : costs) {
    for (double gamma : gammas) {
      int correct = 0, total = 0;
      for (int fold = 0; fold < folds; ++fold) {
        LabeledSet fit_part, val_part;
        fit_part.feature_names = train.feature_names;
        val_part.feature_names = train.feature_names;
        for (std::size_t i = 0; i < train.size(); ++i) {
          LabeledSet& dst =
              static_cast<int>(i % static_cast<std::size_t>(folds)) == fold ? val_part : fit_part;
          dst.x.push_back(train.x[i]);
          dst.y.push_back(train.y[i]);
        }
        bool has0 = false, has1 = false;
        for (int label : fit_part.y) (label == 1 ? has1 : has0) = true;
        if (!has0 || !has1) continue;
        SvmConfig config;
        config.cost = cost;
        config.gamma = gamma;
        const SvmModel model = train_svm(fit_part, config);
        for (std::size_t i = 0; i < val_part.size(); ++i) {
          correct += model.predict(val_part.x[i]) == val_part.y[i] ? 1 : 0;
          ++total;
        }
      }
      const double accuracy = total > 0 ? static_cast<double>(correct) / total : 0.0;
      if (accuracy > best.cv_accuracy) {
        best = GridSearchResult{cost, gamma, accuracy};
      }
    }
  }
  return best;
}

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<double>& scores,
                    const std::vector<int>& labels) {
  if (predictions.size() != labels.size() || scores.size() != labels.size()) {
    fail(ErrorKind::parameter, "evaluate: inputs differ in length");
  }
  if (labels.empty()) fail(ErrorKind::precondition, "evaluate: empty test set");

  EvalReport report;
  report.evaluated = static_cast<int>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    report.confusion[labels[i]][predictions[i]] += 1;
  }
  const double n = static_cast<double>(labels.size());
  const double correct = report.confusion[0][0] + report.confusion[1][1];
  report.accuracy = correct / n;

  // Per-class precision/recall/F1, weighted by class support. Zero
  // denominators contribute zero. Support-weighting the recalls telescopes
  // back to correct/n, so the weighted recall is written as exactly that
  // expression and the equality with accuracy holds bit-for-bit.
  double w_precision = 0.0, w_f1 = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    const double tp = report.confusion[cls][cls];
    const double support = report.confusion[cls][0] + report.confusion[cls][1];
    const double predicted = report.confusion[0][cls] + report.confusion[1][cls];
    const double precision = predicted > 0 ? tp / predicted : 0.0;
    const double recall = support > 0 ? tp / support : 0.0;
    const double f1 =
        precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    const double weight = support / n;
    w_precision += weight * precision;
    w_f1 += weight * f1;
  }
  report.precision = w_precision;
  report.recall = correct / n;
  report.f1 = w_f1;

  // ROC by descending score with tie grouping; trapezoidal AUC.
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double positives = 0.0, negatives = 0.0;
  for (int label : labels) (label == 1 ? positives : negatives) += 1.0;
  report.roc.emplace_back(0.0, 0.0);
  double tp = 0.0, fp = 0.0, auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double threshold = scores[order[k]];
    while (k < order.size() && scores[order[k]] == threshold) {
      (labels[order[k]] == 1 ? tp : fp) += 1.0;
      ++k;
    }
    const double tpr = positives > 0 ? tp / positives : 0.0;
    const double fpr = negatives > 0 ? fp / negatives : 0.0;
    auc += 0.5 * (fpr - prev_fpr) * (tpr + prev_tpr);
    report.roc.emplace_back(fpr, tpr);
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  report.auc = auc;
  return report;
}

namespace {

json tree_json_object(const TreeModel& model) {
  json nodes = json::array();
  for (const TreeNode& node : model.nodes) {
    nodes.push_back(json{{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right},
                         {"counts", node.class_counts}});
  }
  return json{{"format_version", 1}, {"model", "decision_tree"}, {"nodes", nodes}};
}

TreeModel tree_from_object(const json& doc) {
  if (doc.value("format_version", 0) != 1) {
    fail(ErrorKind::parse, "unsupported model format version");
  }
  TreeModel model;
  for (const auto& jn : doc.at("nodes")) {
    TreeNode node;
    node.feature = jn.at("feature").get<int>();
    node.threshold = jn.at("threshold").get<double>();
    node.left = jn.at("left").get<int>();
    node.right = jn.at("right").get<int>();
    const auto counts = jn.at("counts").get<std::vector<double>>();
    node.class_counts = {counts.at(0), counts.at(1)};
    model.nodes.push_back(node);
  }
  return model;
}

}  // namespace

std::string tree_to_json(const TreeModel& model) { return tree_json_object(model).dump(2); }

TreeModel tree_from_json(const std::string& text) {
  return tree_from_object(json::parse(text));
}

std::string forest_to_json(const ForestModel& model) {
  json trees = json::array();
  for (const TreeModel& tree : model.trees) trees.push_back(tree_json_object(tree));
  json doc{{"format_version", 1},
           {"model", "random_forest"},
           {"n_features", model.n_features},
           {"n_trees", model.config.n_trees},
           {"feature_subset", model.config.feature_subset},
           {"bootstrap", model.config.bootstrap},
           {"seed", model.config.seed},
           {"tree_seeds", model.tree_seeds},
           {"trees", trees}};
  return doc.dump(2);
}

ForestModel forest_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.value("format_version", 0) != 1) {
    fail(ErrorKind::parse, "unsupported model format version");
  }
  ForestModel model;
  model.n_features = doc.at("n_features").get<std::size_t>();
  model.config.n_trees = doc.at("n_trees").get<int>();
  model.config.feature_subset = doc.at("feature_subset").get<int>();
  model.config.bootstrap = doc.at("bootstrap").get<bool>();
  model.config.seed = doc.at("seed").get<std::uint64_t>();
  model.tree_seeds = doc.at("tree_seeds").get<std::vector<std::uint64_t>>();
  for (const auto& jt : doc.at("trees")) model.trees.push_back(tree_from_object(jt));
  return model;
}

std::string svm_to_json(const SvmModel& model) {
  json doc{{"format_version", 1},
           {"model", "rbf_svm"},
           {"gamma", model.gamma},
           {"cost", model.cost},
           {"bias", model.bias},
           {"dual_coefs", model.dual_coefs},
           {"support_vectors", model.support_vectors}};
  return doc.dump(2);
}

SvmModel svm_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.value("format_version", 0) != 1) {
    fail(ErrorKind::parse, "unsupported model format version");
  }
  SvmModel model;
  model.gamma = doc.at("gamma").get<double>();
  model.cost = doc.at("cost").get<double>();
  model.bias = doc.at("bias").get<double>();
  model.dual_coefs = doc.at("dual_coefs").get<std::vector<double>>();
  model.support_vectors = doc.at("support_vectors").get<std::vector<std::vector<double>>>();
  return model;
}

}  // namespace lcmine
