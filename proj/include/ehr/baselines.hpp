#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ehr/cohort.hpp"
#include "ehr/embedding.hpp"
#include "ehr/metrics.hpp"
#include "ehr/representations.hpp"

namespace ehr {

// Row-major dense feature matrix.
struct FeatureMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(size_t i) const {
    return {data.data() + i * cols, cols};
  }
  std::span<double> row_mut(size_t i) { return {data.data() + i * cols, cols}; }
};

enum class LossKind { Logistic, Hinge };

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  LossKind loss_kind = LossKind::Logistic;
  double l2_lambda = 0.0;
};

struct LinearTrainConfig {
  int max_iters = 10000;
  double grad_tol = 1e-6;
};

// Full-batch gradient descent with backtracking line search on
// mean loss + (lambda/2)||w||^2; the bias is unregularized. Labels are
// {0,1}; hinge uses the subgradient. objective_trace, when given, records
// the objective after every accepted step.
LinearModel train_linear(const FeatureMatrix& x, std::span<const int> labels,
                         LossKind loss_kind, double l2_lambda,
                         const LinearTrainConfig& config = {},
                         std::vector<double>* objective_trace = nullptr);

// Sigmoid of the margin for both losses, so scores are in (0,1) and
// monotone in w.x + b.
double predict_linear(const LinearModel& model, std::span<const double> x);

double linear_objective(const LinearModel& model, const FeatureMatrix& x,
                        std::span<const int> labels);

// Gradient of the regularized objective at the model's parameters.
void linear_gradient(const FeatureMatrix& x, std::span<const int> labels,
                     const LinearModel& model, std::span<double> grad_w,
                     double* grad_b);

struct ForestNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double probability = 0.0;  // positive-class frequency at a leaf
};

struct ForestModel {
  std::vector<std::vector<ForestNode>> trees;
  uint32_t max_trees = 50;
  uint64_t seed = 1;
};

// Trees added one at a time on bootstrap samples (Gini impurity, sqrt(N)
// features per split, min leaf 2); tree count stops growing after 5
// consecutive trees without validation-AUROC improvement, hard cap 50.
// The retained ensemble is the prefix that achieved the best AUROC.
ForestModel train_forest(const FeatureMatrix& x, std::span<const int> labels,
                         const FeatureMatrix& x_val, std::span<const int> val_labels,
                         uint64_t seed);

double predict_forest(const ForestModel& model, std::span<const double> x);

enum class ClassifierKind { LR, SVM, RF };
const char* to_string(ClassifierKind kind);
ClassifierKind parse_classifier(const std::string& s);  // throws ConfigError

struct BaselineCell {
  ClassifierKind classifier = ClassifierKind::LR;
  AggregationMode representation = AggregationMode::BofW;
  MetricSet metrics;
  std::optional<double> chosen_lambda;  // LR / SVM only
};

struct BaselineSuiteConfig {
  std::vector<ClassifierKind> classifiers = {ClassifierKind::LR, ClassifierKind::SVM,
                                             ClassifierKind::RF};
  std::vector<AggregationMode> representations = {
      AggregationMode::BofW,   AggregationMode::W2vAve, AggregationMode::W2vSum,
      AggregationMode::W2vMax, AggregationMode::W2vAll, AggregationMode::RandSum};
  std::vector<double> lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  uint64_t seed = 1;
};

// Trains every (classifier x representation) cell on the train split,
// selects lambda on validation AUROC, reports test metrics. emb may be
// null when no W2v representation is requested; vocab_size drives BofW
// and the RandSum matrix shape.
std::vector<BaselineCell> run_baseline_suite(const CohortDataset& cohort,
                                             const EmbeddingMatrix* emb,
                                             uint32_t vocab_size,
                                             const BaselineSuiteConfig& config);

// Feature construction shared by the suite and the CLI.
FeatureMatrix build_features(std::span<const LabeledSequence> sequences,
                             AggregationMode mode, const EmbeddingMatrix* emb,
                             const EmbeddingMatrix* rand_emb, uint32_t vocab_size);

}  // namespace ehr
