#include <cmath>
#include <vector>

#include "doctest.h"
#include "ehr/baselines.hpp"
#include "ehr/errors.hpp"
#include "ehr/rng.hpp"

using namespace ehr;

namespace {

FeatureMatrix matrix_of(const std::vector<std::vector<double>>& rows) {
  FeatureMatrix m;
  m.rows = rows.size();
  m.cols = rows[0].size();
  for (const auto& r : rows) m.data.insert(m.data.end(), r.begin(), r.end());
  return m;
}

// Random matrix plus labels guaranteed to hold both classes.
void random_problem(Rng& rng, size_t n, size_t d, FeatureMatrix& x,
                    std::vector<int>& y) {
  x.rows = n;
  x.cols = d;
  x.data.resize(n * d);
  for (double& v : x.data) v = rng.real(-2.0, 2.0);
  y.resize(n);
  for (auto& v : y) v = static_cast<int>(rng.below(2));
  y[0] = 1;
  y[1] = 0;
}

CohortDataset toy_cohort(uint32_t vocab, size_t per_split, uint64_t seed) {
  Rng rng(seed);
  CohortDataset data;
  const auto fill = [&](std::vector<LabeledSequence>& split, const char* tag) {
    for (size_t i = 0; i < per_split; ++i) {
      LabeledSequence s;
      s.patient_id = std::string(tag) + std::to_string(i);
      s.label = static_cast<int>(i % 2);
      const size_t len = 6 + rng.below(10);
      for (size_t j = 0; j < len; ++j) {
        uint32_t code = static_cast<uint32_t>(rng.below(vocab));
        if (code == 3) code = 2;
        s.indices.push_back(code);
      }
      if (s.label == 1) s.indices[rng.below(s.indices.size())] = 3;
      s.days.assign(s.indices.size(), 0);
      split.push_back(std::move(s));
    }
  };
  fill(data.train, "tr");
  fill(data.val, "va");
  fill(data.test, "te");
  data.recount();
  return data;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("separable 1-d data learns a positive weight with full accuracy") {
  const FeatureMatrix x = matrix_of({{1.0}, {1.0}, {-1.0}, {-1.0}});
  const std::vector<int> y{1, 1, 0, 0};
  const LinearModel model = train_linear(x, y, LossKind::Logistic, 0.01);
  CHECK(model.weights[0] > 0.0);
  for (size_t i = 0; i < 4; ++i) {
    const double p = predict_linear(model, x.row(i));
    CHECK((p >= 0.5 ? 1 : 0) == y[i]);
  }
}

TEST_CASE("huge lambda crushes the weights while the bias stays unregularized") {
  Rng rng(41);
  FeatureMatrix x;
  std::vector<int> y;
  random_problem(rng, 40, 3, x, y);
  // Unbalanced labels so the optimal bias is clearly nonzero.
  for (size_t i = 0; i < y.size(); ++i) y[i] = i < 30 ? 1 : 0;
  const LinearModel crushed = train_linear(x, y, LossKind::Logistic, 1e6);
  double norm = 0;
  for (const double w : crushed.weights) norm += w * w;
  CHECK(std::sqrt(norm) < 1e-3);

  // At a moderate lambda the weights shrink but the free bias still moves
  // to match the 3:1 class prior (log 3 when w is negligible).
  const LinearModel biased = train_linear(x, y, LossKind::Logistic, 10.0);
  CHECK(biased.bias > 0.5);
}

TEST_CASE("analytic logistic gradient matches finite differences") {
  Rng rng(42);
  FeatureMatrix x;
  std::vector<int> y;
  random_problem(rng, 5, 4, x, y);

  LinearModel model;
  model.weights = {0.3, -0.2, 0.5, 0.1};
  model.bias = -0.4;
  model.loss_kind = LossKind::Logistic;
  model.l2_lambda = 0.05;

  std::vector<double> grad_w(4);
  double grad_b = 0;
  linear_gradient(x, y, model, grad_w, &grad_b);

  const double h = 1e-6;
  for (size_t j = 0; j <= 4; ++j) {
    LinearModel up = model, down = model;
    if (j < 4) {
      up.weights[j] += h;
      down.weights[j] -= h;
    } else {
      up.bias += h;
      down.bias -= h;
    }
    const double numeric =
        (linear_objective(up, x, y) - linear_objective(down, x, y)) / (2 * h);
    const double analytic = j < 4 ? grad_w[j] : grad_b;
    CHECK(std::abs(analytic - numeric) /
              std::max({std::abs(analytic), std::abs(numeric), 1e-8}) <
          1e-6);
  }
}

TEST_CASE("predict_linear basics") {
  LinearModel model;
  model.weights = {0.0, 0.0};
  model.bias = 0.0;
  CHECK(predict_linear(model, std::vector<double>{3.0, -1.0}) == 0.5);

  double prev = 0.0;
  for (double b = -2.0; b <= 2.0; b += 0.5) {
    model.bias = b;
    const double p = predict_linear(model, std::vector<double>{1.0, 1.0});
    CHECK(p > prev);
    prev = p;
  }
  model.bias = 0.0;
  CHECK_THROWS_AS(predict_linear(model, std::vector<double>{1.0}), ConfigError);
}

TEST_CASE("objective is non-increasing for both losses") {
  Rng rng(43);
  FeatureMatrix x;
  std::vector<int> y;
  random_problem(rng, 60, 6, x, y);
  for (const LossKind kind : {LossKind::Logistic, LossKind::Hinge}) {
    std::vector<double> trace;
    train_linear(x, y, kind, 0.01, {.max_iters = 300}, &trace);
    REQUIRE(trace.size() > 2);
    for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);
  }
}

TEST_CASE("single-class input is an error") {
  const FeatureMatrix x = matrix_of({{1.0}, {2.0}});
  CHECK_THROWS_AS(train_linear(x, std::vector<int>{1, 1}, LossKind::Logistic, 0.0),
                  DataError);
}

TEST_CASE("a perfectly splitting feature solves validation with one tree") {
  // Feature 0 separates the classes exactly.
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  Rng rng(44);
  for (int i = 0; i < 40; ++i) {
    const int label = i % 2;
    rows.push_back({label ? 2.0 + rng.real01() : -2.0 - rng.real01(), rng.real01()});
    y.push_back(label);
  }
  const FeatureMatrix x = matrix_of(rows);
  const ForestModel model = train_forest(x, y, x, y, 5);
  for (int i = 0; i < 40; ++i) {
    const double p = predict_forest(model, x.row(i));
    CHECK((p >= 0.5 ? 1 : 0) == y[i]);
  }
}

TEST_CASE("tree count never exceeds 50") {
  Rng rng(45);
  FeatureMatrix x;
  std::vector<int> y;
  random_problem(rng, 80, 5, x, y);  // labels are pure noise
  FeatureMatrix xv;
  std::vector<int> yv;
  random_problem(rng, 30, 5, xv, yv);
  const ForestModel model = train_forest(x, y, xv, yv, 6);
  CHECK(model.trees.size() <= 50);
  CHECK(!model.trees.empty());
}

TEST_CASE("the retained ensemble holds the running-best validation auroc") {
  Rng rng(47);
  FeatureMatrix x;
  std::vector<int> y;
  random_problem(rng, 120, 6, x, y);
  // Weak signal so the ensemble neither saturates instantly nor stalls.
  for (size_t i = 0; i < y.size(); ++i)
    if (x.row(i)[0] > 0.8) y[i] = 1;
  y[0] = 1;
  y[1] = 0;
  FeatureMatrix xv;
  std::vector<int> yv;
  random_problem(rng, 50, 6, xv, yv);
  for (size_t i = 0; i < yv.size(); ++i)
    if (xv.row(i)[0] > 0.8) yv[i] = 1;
  yv[0] = 1;
  yv[1] = 0;

  const ForestModel model = train_forest(x, y, xv, yv, 31);
  REQUIRE(!model.trees.empty());

  // Validation AUROC of every prefix; the full retained ensemble must win.
  double best_prefix = -1.0;
  double full = 0.0;
  for (size_t t = 0; t < model.trees.size(); ++t) {
    ForestModel prefix;
    prefix.trees.assign(model.trees.begin(), model.trees.begin() + t + 1);
    std::vector<double> scores(xv.rows);
    for (size_t i = 0; i < xv.rows; ++i) scores[i] = predict_forest(prefix, xv.row(i));
    const double score = auroc(scores, yv);
    best_prefix = std::max(best_prefix, score);
    if (t + 1 == model.trees.size()) full = score;
  }
  CHECK(full == best_prefix);
}

TEST_CASE("forests are deterministic under a fixed seed") {
  Rng rng(46);
  FeatureMatrix x;
  std::vector<int> y;
  random_problem(rng, 50, 4, x, y);
  FeatureMatrix xv;
  std::vector<int> yv;
  random_problem(rng, 20, 4, xv, yv);
  const ForestModel a = train_forest(x, y, xv, yv, 123);
  const ForestModel b = train_forest(x, y, xv, yv, 123);
  REQUIRE(a.trees.size() == b.trees.size());
  for (size_t i = 0; i < x.rows; ++i)
    CHECK(predict_forest(a, x.row(i)) == predict_forest(b, x.row(i)));
}

TEST_CASE("forest rejects single-class training data and empty validation") {
  const FeatureMatrix x = matrix_of({{1.0}, {2.0}});
  const FeatureMatrix empty{0, 1, {}};
  CHECK_THROWS_AS(train_forest(x, std::vector<int>{1, 1}, x, std::vector<int>{1, 1}, 1),
                  DataError);
  CHECK_THROWS_AS(train_forest(x, std::vector<int>{1, 0}, empty, std::vector<int>{}, 1),
                  DataError);
}

TEST_CASE("suite: single cell") {
  const auto cohort = toy_cohort(8, 30, 9);
  BaselineSuiteConfig config;
  config.classifiers = {ClassifierKind::LR};
  config.representations = {AggregationMode::BofW};
  const auto cells = run_baseline_suite(cohort, nullptr, 8, config);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].classifier == ClassifierKind::LR);
  CHECK(cells[0].representation == AggregationMode::BofW);
  CHECK(cells[0].metrics.auroc > 0.9);  // marker code is fully informative
  CHECK(cells[0].chosen_lambda.has_value());
}

TEST_CASE("suite: rows cover the requested cross product in order") {
  const auto cohort = toy_cohort(8, 24, 10);
  const auto emb = random_embedding_matrix(8, 4, 2);
  BaselineSuiteConfig config;
  config.classifiers = {ClassifierKind::LR, ClassifierKind::RF};
  config.representations = {AggregationMode::BofW, AggregationMode::W2vSum,
                            AggregationMode::RandSum};
  const auto cells = run_baseline_suite(cohort, &emb, 8, config);
  REQUIRE(cells.size() == 6);
  size_t i = 0;
  for (const auto rep : config.representations)
    for (const auto cls : config.classifiers) {
      CHECK(cells[i].classifier == cls);
      CHECK(cells[i].representation == rep);
      ++i;
    }
}

TEST_CASE("suite requires embeddings for W2v representations") {
  const auto cohort = toy_cohort(8, 24, 11);
  BaselineSuiteConfig config;
  config.classifiers = {ClassifierKind::LR};
  config.representations = {AggregationMode::W2vAve};
  CHECK_THROWS_AS(run_baseline_suite(cohort, nullptr, 8, config), ConfigError);
}

TEST_CASE("permutation-invariant features transfer predictions exactly") {
  const auto cohort = toy_cohort(8, 24, 12);
  const auto emb = random_embedding_matrix(8, 4, 2);
  const auto x = build_features(cohort.test, AggregationMode::W2vAll, &emb, nullptr, 8);

  CohortDataset permuted = cohort;
  Rng rng(13);
  for (auto& s : permuted.test) rng.shuffle(s.indices);
  const auto xp =
      build_features(permuted.test, AggregationMode::W2vAll, &emb, nullptr, 8);
  CHECK(x.data == xp.data);
}

}  // TEST_SUITE
