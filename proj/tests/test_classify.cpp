#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lcmine/classify.hpp"
#include "lcmine/mathutil.hpp"

using namespace lcmine;

namespace {

LabeledSet make_set(const std::vector<std::vector<double>>& x, const std::vector<int>& y) {
  LabeledSet s;
  s.feature_names.resize(x.empty() ? 0 : x[0].size());
  for (std::size_t k = 0; k < s.feature_names.size(); ++k) {
    s.feature_names[k] = "f" + std::to_string(k);
  }
  s.x = x;
  s.y = y;
  return s;
}

/// Noisy nonlinear task: XOR signal on the first two features plus
/// nuisance features and label noise.
LabeledSet noisy_task(std::size_t n, std::uint64_t seed, std::size_t nuisance = 6) {
  Rng rng(seed);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    const double a = -1.0 + 2.0 * rng.next_double();
    const double b = -1.0 + 2.0 * rng.next_double();
    row.push_back(a);
    row.push_back(b);
    for (std::size_t k = 0; k < nuisance; ++k) row.push_back(-1.0 + 2.0 * rng.next_double());
    int label = (a > 0.0) != (b > 0.0) ? 1 : 0;
    if (rng.next_double() < 0.15) label = 1 - label;
    x.push_back(std::move(row));
    y.push_back(label);
  }
  return make_set(x, y);
}

/// Jacobi eigenvalues of a symmetric matrix (test-only).
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
    }
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p * n + q]) < 1e-18) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * a[p * n + q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
  return eig;
}

double train_accuracy(const TreeModel& tree, const LabeledSet& data) {
  int correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    correct += tree.predict(data.x[i]) == data.y[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / data.size();
}

}  // namespace

TEST_CASE("train/test split sizes and determinism") {
  LabeledSet data;
  data.feature_names = {"f0"};
  for (int i = 0; i < 252; ++i) {
    data.x.push_back({static_cast<double>(i)});
    data.y.push_back(i % 2);
  }
  auto [train, test] = split_train_test(data, 0.8, 7);
  CHECK(train.size() == 201);
  CHECK(test.size() == 51);

  LabeledSet ten = data;
  ten.x.resize(10);
  ten.y.resize(10);
  auto [t8, t2] = split_train_test(ten, 0.8, 3);
  CHECK(t8.size() == 8);
  CHECK(t2.size() == 2);

  auto [a_train, a_test] = split_train_test(data, 0.8, 99);
  auto [b_train, b_test] = split_train_test(data, 0.8, 99);
  CHECK(a_train.x == b_train.x);
  CHECK(a_test.x == b_test.x);

  CHECK_THROWS_AS(split_train_test(data, 0.0, 1), Error);
  CHECK_THROWS_AS(split_train_test(data, 1.0, 1), Error);
}

TEST_CASE("gini impurity values and bounds") {
  CHECK(gini(std::vector<double>{1.0}) == doctest::Approx(0.0));
  CHECK(gini(std::vector<double>{0.5, 0.5}) == doctest::Approx(0.5));
  CHECK(gini(std::vector<double>{0.7, 0.3}) == doctest::Approx(0.42));
  CHECK_THROWS_AS(gini(std::vector<double>{0.7, 0.7}), Error);
  CHECK_THROWS_AS(gini(std::vector<double>{-0.2, 1.2}), Error);

  // 0 <= G <= 1 - 1/K, maximal exactly at the uniform point.
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng.next_below(4);
    std::vector<double> p(k);
    double sum = 0.0;
    for (auto& v : p) {
      v = rng.next_double() + 1e-3;
      sum += v;
    }
    for (auto& v : p) v /= sum;
    const double g = gini(p);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0 - 1.0 / k + 1e-12);
  }
  CHECK(gini(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == doctest::Approx(0.75));
}

TEST_CASE("linearly separable data needs a single split") {
  const LabeledSet data = make_set({{1.0}, {2.0}, {3.0}, {10.0}, {11.0}, {12.0}},
                                   {0, 0, 0, 1, 1, 1});
  const TreeModel tree = train_tree(data);
  CHECK(tree.nodes.size() == 3);  // root + two leaves
  CHECK(tree.nodes[0].threshold == doctest::Approx(6.5));
  CHECK(train_accuracy(tree, data) == doctest::Approx(1.0));
}

TEST_CASE("unlimited depth fits any consistent dataset exactly, including xor") {
  const LabeledSet xor_set = make_set({{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}},
                                      {0, 1, 1, 0});
  const TreeModel tree = train_tree(xor_set);
  CHECK(train_accuracy(tree, xor_set) == doctest::Approx(1.0));

  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
      x.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
      y.push_back(static_cast<int>(rng.next_below(2)));
    }
    const LabeledSet random_set = make_set(x, y);
    CHECK(train_accuracy(train_tree(random_set), random_set) == doctest::Approx(1.0));
  }
}

TEST_CASE("max depth and min samples limits are honored") {
  const LabeledSet xor_set = make_set({{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}},
                                      {0, 1, 1, 0});
  TreeConfig shallow;
  shallow.max_depth = 0;
  const TreeModel stump = train_tree(xor_set, shallow);
  CHECK(stump.nodes.size() == 1);
  CHECK(stump.nodes[0].is_leaf());

  TreeConfig chunky;
  chunky.min_samples_split = 5;
  const TreeModel blocked = train_tree(xor_set, chunky);
  CHECK(blocked.nodes.size() == 1);
}

TEST_CASE("root split matches exhaustive enumeration on a 6-point set") {
  const LabeledSet data = make_set(
      {{2.0, 7.0}, {3.0, 5.0}, {4.0, 9.0}, {5.0, 1.0}, {6.0, 8.0}, {7.0, 2.0}},
      {0, 0, 1, 0, 1, 1});
  const TreeModel tree = train_tree(data);
  REQUIRE(!tree.nodes[0].is_leaf());

  // Oracle: enumerate every (feature, midpoint) split.
  double best_impurity = 1e9;
  int best_feature = -1;
  double best_threshold = 0.0;
  for (int feature = 0; feature < 2; ++feature) {
    std::vector<double> values;
    for (const auto& row : data.x) values.push_back(row[feature]);
    std::sort(values.begin(), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      if (values[k] == values[k + 1]) continue;
      const double threshold = 0.5 * (values[k] + values[k + 1]);
      double l0 = 0, l1 = 0, r0 = 0, r1 = 0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        const bool left = data.x[i][feature] <= threshold;
        if (left) {
          (data.y[i] == 0 ? l0 : l1) += 1;
        } else {
          (data.y[i] == 0 ? r0 : r1) += 1;
        }
      }
      const double nl = l0 + l1, nr = r0 + r1;
      const double gl = 1.0 - (l0 * l0 + l1 * l1) / (nl * nl);
      const double gr = 1.0 - (r0 * r0 + r1 * r1) / (nr * nr);
      const double weighted = (nl * gl + nr * gr) / data.size();
      const bool better = weighted < best_impurity - 1e-12 ||
                          (std::abs(weighted - best_impurity) <= 1e-12 &&
                           (feature < best_feature ||
                            (feature == best_feature && threshold < best_threshold)));
      if (better) {
        best_impurity = weighted;
        best_feature = feature;
        best_threshold = threshold;
      }
    }
  }
  CHECK(tree.nodes[0].feature == best_feature);
  CHECK(tree.nodes[0].threshold == doctest::Approx(best_threshold));
}

TEST_CASE("identical training data yields identical trees") {
  const LabeledSet data = noisy_task(120, 5);
  const TreeModel a = train_tree(data);
  const TreeModel b = train_tree(data);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t k = 0; k < a.nodes.size(); ++k) {
    CHECK(a.nodes[k].feature == b.nodes[k].feature);
    CHECK(a.nodes[k].threshold == b.nodes[k].threshold);
  }
}

TEST_CASE("degenerate forest equals a single tree") {
  const LabeledSet data = noisy_task(150, 8);
  ForestConfig config;
  config.n_trees = 1;
  config.bootstrap = false;
  config.feature_subset = static_cast<int>(data.dim());
  const ForestModel forest = train_forest(data, config);
  const TreeModel tree = train_tree(data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(forest.predict(data.x[i]) == tree.predict(data.x[i]));
  }
}

TEST_CASE("forest training is deterministic per seed") {
  const LabeledSet data = noisy_task(150, 9);
  ForestConfig config;
  config.n_trees = 15;
  config.seed = 1234;
  const ForestModel a = train_forest(data, config);
  const ForestModel b = train_forest(data, config);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(a.score(data.x[i]) == b.score(data.x[i]));
  }
}

TEST_CASE("forest beats a single unpruned tree on average across seeds") {
  // Additive nonlinear signal (2-of-3 vote) with label noise and nuisance
  // features: the structure where bagging pays off.
  auto vote_task = [](std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row;
      for (int k = 0; k < 8; ++k) row.push_back(-1.0 + 2.0 * rng.next_double());
      const int votes = (row[0] > 0) + (row[1] > 0) + (row[2] > 0);
      int label = votes >= 2 ? 1 : 0;
      if (rng.next_double() < 0.1) label = 1 - label;
      x.push_back(std::move(row));
      y.push_back(label);
    }
    return make_set(x, y);
  };
  double tree_total = 0.0, forest_total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const LabeledSet data = vote_task(252, seed * 101);
    auto [train, test] = split_train_test(data, 0.8, seed);
    const TreeModel tree = train_tree(train);
    ForestConfig config;
    config.n_trees = 100;
    config.seed = seed;
    const ForestModel forest = train_forest(train, config);
    CHECK(evaluate_model(tree, train).accuracy == doctest::Approx(1.0));
    tree_total += evaluate_model(tree, test).accuracy;
    forest_total += evaluate_model(forest, test).accuracy;
  }
  CHECK(forest_total / 20.0 > tree_total / 20.0);
}

TEST_CASE("feature importance: single-feature tree and normalization") {
  const LabeledSet one = make_set({{1.0}, {2.0}, {8.0}, {9.0}}, {0, 0, 1, 1});
  ForestConfig config;
  config.n_trees = 1;
  config.bootstrap = false;
  config.feature_subset = 1;
  const ForestModel forest = train_forest(one, config);
  const auto importance = feature_importance(forest, one.feature_names);
  REQUIRE(importance.size() == 1);
  CHECK(importance[0].mean == doctest::Approx(1.0));
  CHECK(importance[0].sd == doctest::Approx(0.0));

  // Means sum to 1 (importances are normalized per tree).
  const LabeledSet data = noisy_task(150, 33);
  ForestConfig fc;
  fc.n_trees = 25;
  fc.seed = 5;
  const ForestModel big = train_forest(data, fc);
  const auto entries = feature_importance(big, data.feature_names);
  double sum = 0.0;
  for (const auto& e : entries) sum += e.mean;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  // Sorted descending.
  for (std::size_t k = 1; k < entries.size(); ++k) {
    CHECK(entries[k - 1].mean >= entries[k].mean);
  }
}

TEST_CASE("planted informative feature ranks first") {
  Rng rng(71);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 240; ++i) {
    std::vector<double> row;
    const double signal = -1.0 + 2.0 * rng.next_double();
    row.push_back(signal);
    for (int k = 0; k < 8; ++k) row.push_back(-1.0 + 2.0 * rng.next_double());
    x.push_back(std::move(row));
    y.push_back(signal > 0 ? 1 : 0);
  }
  const LabeledSet data = make_set(x, y);
  ForestConfig config;
  config.n_trees = 40;
  config.seed = 9;
  const ForestModel forest = train_forest(data, config);
  const auto entries = feature_importance(forest, data.feature_names);
  CHECK(entries.front().feature == "f0");
  CHECK(entries.front().mean > 0.5);
}

TEST_CASE("rbf kernel values, symmetry, and gram positive semidefiniteness") {
  const std::vector<double> a{1.0, 2.0}, b{2.0, 3.0};
  CHECK(rbf_kernel(a, a, 0.7) == doctest::Approx(1.0));
  CHECK(rbf_kernel(a, b, 0.0) == doctest::Approx(1.0));
  CHECK(rbf_kernel(a, b, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(rbf_kernel(a, b, 0.5) == rbf_kernel(b, a, 0.5));
  CHECK_THROWS_AS(rbf_kernel(a, std::vector<double>{1.0}, 0.5), Error);
  CHECK_THROWS_AS(rbf_kernel(a, b, -0.1), Error);

  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 8 + rng.next_below(5);
    std::vector<std::vector<double>> points;
    for (std::size_t i = 0; i < n; ++i) {
      points.push_back({rng.next_double() * 4.0, rng.next_double() * 4.0,
                        rng.next_double() * 4.0});
    }
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        gram[i * n + j] = rbf_kernel(points[i], points[j], 0.8);
        CHECK(gram[i * n + j] > 0.0);
        CHECK(gram[i * n + j] <= 1.0);
      }
    }
    const auto eig = symmetric_eigenvalues(gram, n);
    for (double v : eig) CHECK(v >= -1e-8);
  }
}

TEST_CASE("svm separates gaussian blobs") {
  Rng rng(21);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 160; ++i) {
    const int label = i % 2;
    const double cx = label == 1 ? 2.0 : -2.0;
    x.push_back({cx + 0.6 * rng.next_normal(), cx + 0.6 * rng.next_normal()});
    y.push_back(label);
  }
  const LabeledSet data = make_set(x, y);
  auto [train, test] = split_train_test(data, 0.8, 3);
  const Standardizer scaler = Standardizer::fit(train);
  const SvmModel model = train_svm(scaler.apply(train));
  CHECK(evaluate_model(model, scaler.apply(test)).accuracy >= 0.95);

  // Dual coefficients stay inside the box [0, C].
  for (double coef : model.dual_coefs) {
    CHECK(std::abs(coef) <= model.cost + 1e-9);
    CHECK(std::abs(coef) > 0.0);
  }
}

TEST_CASE("svm fits the xor pattern through the rbf map") {
  Rng rng(22);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    const double a = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.3 * rng.next_normal());
    const double b = (i % 4 < 2 ? 1.0 : -1.0) * (1.0 + 0.3 * rng.next_normal());
    x.push_back({a, b});
    y.push_back((a > 0) != (b > 0) ? 1 : 0);
  }
  const LabeledSet data = make_set(x, y);
  SvmConfig config;
  config.cost = 5.0;
  config.gamma = 1.0;
  const SvmModel model = train_svm(data, config);
  int correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    correct += model.predict(data.x[i]) == data.y[i] ? 1 : 0;
  }
  CHECK(static_cast<double>(correct) / data.size() >= 0.95);
}

TEST_CASE("svm requires both classes") {
  const LabeledSet bad = make_set({{1.0}, {2.0}}, {1, 1});
  CHECK_THROWS_AS(train_svm(bad), Error);
}

TEST_CASE("grid search returns the best (C, gamma) cell") {
  const LabeledSet data = noisy_task(120, 44, 2);
  const double costs[] = {0.5, 2.0};
  const double gammas[] = {0.3, 1.0};
  const GridSearchResult best = svm_grid_search(data, costs, gammas, 4);
  CHECK(best.cv_accuracy > 0.5);
  CHECK((best.cost == 0.5 || best.cost == 2.0));
  CHECK((best.gamma == 0.3 || best.gamma == 1.0));
}

TEST_CASE("evaluate: perfect predictions, hand-computed case, identities") {
  const std::vector<int> labels{1, 1, 0, 0};
  const EvalReport perfect =
      evaluate({1, 1, 0, 0}, {0.9, 0.8, 0.2, 0.1}, labels);
  CHECK(perfect.accuracy == doctest::Approx(1.0));
  CHECK(perfect.precision == doctest::Approx(1.0));
  CHECK(perfect.recall == doctest::Approx(1.0));
  CHECK(perfect.f1 == doctest::Approx(1.0));
  CHECK(perfect.auc == doctest::Approx(1.0));

  const EvalReport hand = evaluate({1, 0, 0, 0}, {0.9, 0.4, 0.3, 0.2}, labels);
  CHECK(hand.accuracy == doctest::Approx(0.75));
  CHECK(hand.precision == doctest::Approx(0.8333).epsilon(1e-3));
  CHECK(hand.recall == doctest::Approx(0.75));
  CHECK(hand.f1 == doctest::Approx(0.7333).epsilon(1e-3));
  CHECK(hand.confusion[1][1] == 1);
  CHECK(hand.confusion[1][0] == 1);
  CHECK(hand.confusion[0][0] == 2);
  CHECK(hand.confusion[0][1] == 0);

  // Weighted recall equals accuracy on arbitrary prediction vectors, and
  // confusion marginals match class counts.
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.next_below(40);
    std::vector<int> truth(n), pred(n);
    std::vector<double> score(n);
    int ones = 0;
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng.next_below(2));
      pred[i] = static_cast<int>(rng.next_below(2));
      score[i] = rng.next_double();
      ones += truth[i];
    }
    if (ones == 0) truth[0] = 1;
    if (ones == static_cast<int>(n)) truth[0] = 0;
    const EvalReport r = evaluate(pred, score, truth);
    CHECK(r.recall == r.accuracy);  // exact identity
    int count1 = 0;
    for (int v : truth) count1 += v;
    CHECK(r.confusion[1][0] + r.confusion[1][1] == count1);
    CHECK(r.confusion[0][0] + r.confusion[0][1] == static_cast<int>(n) - count1);
  }
}

TEST_CASE("standardization is fitted on train only and inverts exactly") {
  const LabeledSet train = noisy_task(80, 61);
  const LabeledSet test = noisy_task(40, 62);
  const Standardizer scaler = Standardizer::fit(train);
  const LabeledSet scaled_train = scaler.apply(train);

  for (std::size_t k = 0; k < train.dim(); ++k) {
    double mean = 0.0;
    for (const auto& row : scaled_train.x) mean += row[k];
    mean /= scaled_train.size();
    CHECK(std::abs(mean) < 1e-9);
    double var = 0.0;
    for (const auto& row : scaled_train.x) var += row[k] * row[k];
    var /= scaled_train.size();
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-9));
  }

  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto scaled = scaler.apply_row(test.x[i]);
    const auto restored = scaler.invert_row(scaled);
    for (std::size_t k = 0; k < restored.size(); ++k) {
      CHECK(restored[k] == doctest::Approx(test.x[i][k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("model json round trips preserve predictions") {
  const LabeledSet data = noisy_task(100, 55);
  const TreeModel tree = train_tree(data);
  const TreeModel tree2 = tree_from_json(tree_to_json(tree));
  ForestConfig fc;
  fc.n_trees = 9;
  fc.seed = 2;
  const ForestModel forest = train_forest(data, fc);
  const ForestModel forest2 = forest_from_json(forest_to_json(forest));
  const Standardizer scaler = Standardizer::fit(data);
  const SvmModel svm = train_svm(scaler.apply(data));
  const SvmModel svm2 = svm_from_json(svm_to_json(svm));

  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(tree.predict(data.x[i]) == tree2.predict(data.x[i]));
    CHECK(forest.score(data.x[i]) == forest2.score(data.x[i]));
    const auto scaled = scaler.apply_row(data.x[i]);
    CHECK(svm.decision(scaled) == doctest::Approx(svm2.decision(scaled)).epsilon(1e-12));
  }
}
