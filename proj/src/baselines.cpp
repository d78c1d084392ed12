#include "ehr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ehr/errors.hpp"
#include "ehr/rng.hpp"

namespace ehr {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_two_classes(std::span<const int> labels) {
  bool pos = false, neg = false;
  for (const int y : labels) {
    if (y == 1)
      pos = true;
    else if (y == 0)
      neg = true;
    else
      throw DataError("labels must be 0 or 1");
  }
  if (!pos || !neg) throw DataError("training data must contain both classes");
}

// Mean loss over examples; signed labels y in {-1,+1}.
double data_loss(const FeatureMatrix& x, std::span<const int> labels, LossKind kind,
                 std::span<const double> w, double bias) {
  double total = 0.0;
  for (size_t i = 0; i < x.rows; ++i) {
    const auto xi = x.row(i);
    double s = bias;
    for (size_t j = 0; j < x.cols; ++j) s += w[j] * xi[j];
    const double y = labels[i] == 1 ? 1.0 : -1.0;
    const double margin = y * s;
    if (kind == LossKind::Logistic) {
      // log(1 + exp(-m)) computed stably on both tails.
      total += margin > 0.0 ? std::log1p(std::exp(-margin))
                            : -margin + std::log1p(std::exp(margin));
    } else {
      total += std::max(0.0, 1.0 - margin);
    }
  }
  return total / static_cast<double>(x.rows);
}

void data_gradient(const FeatureMatrix& x, std::span<const int> labels, LossKind kind,
                   std::span<const double> w, double bias, std::span<double> gw,
                   double* gb) {
  std::fill(gw.begin(), gw.end(), 0.0);
  *gb = 0.0;
  const double inv = 1.0 / static_cast<double>(x.rows);
  for (size_t i = 0; i < x.rows; ++i) {
    const auto xi = x.row(i);
    double s = bias;
    for (size_t j = 0; j < x.cols; ++j) s += w[j] * xi[j];
    const double y = labels[i] == 1 ? 1.0 : -1.0;
    double dloss_ds;
    if (kind == LossKind::Logistic) {
      dloss_ds = -y * sigmoid(-y * s);
    } else {
      dloss_ds = (y * s < 1.0) ? -y : 0.0;  // hinge subgradient
    }
    const double c = dloss_ds * inv;
    for (size_t j = 0; j < x.cols; ++j) gw[j] += c * xi[j];
    *gb += c;
  }
}

}  // namespace

double linear_objective(const LinearModel& model, const FeatureMatrix& x,
                        std::span<const int> labels) {
  double reg = 0.0;
  for (const double w : model.weights) reg += w * w;
  return data_loss(x, labels, model.loss_kind, model.weights, model.bias) +
         0.5 * model.l2_lambda * reg;
}

void linear_gradient(const FeatureMatrix& x, std::span<const int> labels,
                     const LinearModel& model, std::span<double> grad_w,
                     double* grad_b) {
  if (grad_w.size() != model.weights.size())
    throw ConfigError("linear_gradient: gradient size mismatch");
  data_gradient(x, labels, model.loss_kind, model.weights, model.bias, grad_w, grad_b);
  for (size_t j = 0; j < grad_w.size(); ++j)
    grad_w[j] += model.l2_lambda * model.weights[j];
}

LinearModel train_linear(const FeatureMatrix& x, std::span<const int> labels,
                         LossKind loss_kind, double l2_lambda,
                         const LinearTrainConfig& config,
                         std::vector<double>* objective_trace) {
  if (x.rows != labels.size()) throw ConfigError("train_linear: row/label mismatch");
  if (x.rows < 2) throw DataError("train_linear: need at least two examples");
  if (l2_lambda < 0.0) throw ConfigError("train_linear: lambda must be >= 0");
  check_two_classes(labels);

  LinearModel model;
  model.weights.assign(x.cols, 0.0);
  model.bias = 0.0;
  model.loss_kind = loss_kind;
  model.l2_lambda = l2_lambda;

  std::vector<double> gw(x.cols);
  double gb = 0.0;
  std::vector<double> trial_w(x.cols);

  double objective = linear_objective(model, x, labels);
  if (objective_trace) objective_trace->push_back(objective);
  double step = 1.0;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    data_gradient(x, labels, loss_kind, model.weights, model.bias, gw, &gb);
    for (size_t j = 0; j < x.cols; ++j) gw[j] += l2_lambda * model.weights[j];

    double grad_norm_sq = gb * gb;
    for (const double g : gw) grad_norm_sq += g * g;
    if (std::sqrt(grad_norm_sq) < config.grad_tol) break;

    // Backtracking line search (Armijo). The accepted step seeds the next
    // iteration so well-scaled problems do not re-shrink from 1.0.
    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    while (step > 1e-18) {
      for (size_t j = 0; j < x.cols; ++j) trial_w[j] = model.weights[j] - step * gw[j];
      const double trial_b = model.bias - step * gb;
      LinearModel trial{trial_w, trial_b, loss_kind, l2_lambda};
      const double trial_obj = linear_objective(trial, x, labels);
      if (trial_obj <= objective - 1e-4 * step * grad_norm_sq) {
        model.weights.swap(trial_w);
        model.bias = trial_b;
        objective = trial_obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent step exists at this scale
    if (objective_trace) objective_trace->push_back(objective);
  }
  return model;
}

double predict_linear(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size())
    throw ConfigError("predict_linear: feature dimension mismatch");
  double s = model.bias;
  for (size_t j = 0; j < x.size(); ++j) s += model.weights[j] * x[j];
  return sigmoid(s);
}

namespace {

struct TreeBuilder {
  const FeatureMatrix& x;
  std::span<const int> labels;
  Rng& rng;
  uint32_t features_per_split;
  std::vector<ForestNode> nodes;

  static constexpr size_t kMinLeaf = 2;

  double leaf_probability(std::span<const size_t> sample) const {
    size_t pos = 0;
    for (const size_t i : sample) pos += static_cast<size_t>(labels[i]);
    return static_cast<double>(pos) / static_cast<double>(sample.size());
  }

  static double gini(size_t pos, size_t n) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    return 2.0 * p * (1.0 - p);
  }

  int build(std::vector<size_t>& sample) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[id].probability = leaf_probability(sample);

    size_t pos = 0;
    for (const size_t i : sample) pos += static_cast<size_t>(labels[i]);
    const bool pure = pos == 0 || pos == sample.size();
    if (pure || sample.size() < 2 * kMinLeaf) return id;

    // sqrt(N) features per split, sampled without replacement.
    std::vector<uint32_t> features(x.cols);
    std::iota(features.begin(), features.end(), 0u);
    for (uint32_t k = 0; k < features_per_split && k < features.size(); ++k) {
      const size_t j = k + static_cast<size_t>(rng.below(features.size() - k));
      std::swap(features[k], features[j]);
    }
    features.resize(std::min<size_t>(features_per_split, features.size()));

    const double parent_gini = gini(pos, sample.size());
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> values(sample.size());
    for (const uint32_t f : features) {
      for (size_t i = 0; i < sample.size(); ++i)
        values[i] = {x.row(sample[i])[f], labels[sample[i]]};
      std::sort(values.begin(), values.end());

      size_t left_pos = 0;
      for (size_t i = 0; i + 1 < values.size(); ++i) {
        left_pos += static_cast<size_t>(values[i].second);
        if (values[i].first == values[i + 1].first) continue;
        const size_t nl = i + 1;
        const size_t nr = values.size() - nl;
        if (nl < kMinLeaf || nr < kMinLeaf) continue;
        const double weighted =
            (static_cast<double>(nl) * gini(left_pos, nl) +
             static_cast<double>(nr) * gini(pos - left_pos, nr)) /
            static_cast<double>(values.size());
        const double gain = parent_gini - weighted;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (values[i].first + values[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<size_t> left, right;
    for (const size_t i : sample)
      (x.row(i)[best_feature] <= best_threshold ? left : right).push_back(i);
    if (left.size() < kMinLeaf || right.size() < kMinLeaf) return id;

    nodes[id].feature = best_feature;
    nodes[id].threshold = best_threshold;
    const int left_id = build(left);
    nodes[id].left = left_id;
    const int right_id = build(right);
    nodes[id].right = right_id;
    return id;
  }
};

double predict_tree(const std::vector<ForestNode>& tree, std::span<const double> x) {
  int node = 0;
  while (tree[node].feature >= 0)
    node = x[tree[node].feature] <= tree[node].threshold ? tree[node].left
                                                         : tree[node].right;
  return tree[node].probability;
}

}  // namespace

ForestModel train_forest(const FeatureMatrix& x, std::span<const int> labels,
                         const FeatureMatrix& x_val, std::span<const int> val_labels,
                         uint64_t seed) {
  if (x.rows != labels.size()) throw ConfigError("train_forest: row/label mismatch");
  if (x_val.rows != val_labels.size() || x_val.rows == 0)
    throw DataError("train_forest: validation set must be non-empty");
  check_two_classes(labels);

  ForestModel model;
  model.seed = seed;
  Rng rng(seed);
  const auto features_per_split = static_cast<uint32_t>(std::max(
      1.0, std::floor(std::sqrt(static_cast<double>(x.cols)))));

  std::vector<double> val_sum(x_val.rows, 0.0);
  std::vector<double> val_scores(x_val.rows);
  std::vector<int> val_label_vec(val_labels.begin(), val_labels.end());

  double best_auroc = -1.0;
  size_t best_len = 0;
  uint32_t stale = 0;

  for (uint32_t t = 0; t < model.max_trees; ++t) {
    std::vector<size_t> sample(x.rows);
    for (auto& s : sample) s = static_cast<size_t>(rng.below(x.rows));

    TreeBuilder builder{x, labels, rng, features_per_split, {}};
    builder.build(sample);
    model.trees.push_back(std::move(builder.nodes));

    for (size_t i = 0; i < x_val.rows; ++i) {
      val_sum[i] += predict_tree(model.trees.back(), x_val.row(i));
      val_scores[i] = val_sum[i] / static_cast<double>(model.trees.size());
    }
    const double score = auroc(val_scores, val_label_vec);
    if (score > best_auroc) {
      best_auroc = score;
      best_len = model.trees.size();
      stale = 0;
    } else if (++stale >= 5) {
      break;
    }
  }
  model.trees.resize(best_len);
  return model;
}

double predict_forest(const ForestModel& model, std::span<const double> x) {
  if (model.trees.empty()) throw ConfigError("predict_forest: empty ensemble");
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += predict_tree(tree, x);
  return sum / static_cast<double>(model.trees.size());
}

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::LR: return "lr";
    case ClassifierKind::SVM: return "svm";
    case ClassifierKind::RF: return "rf";
  }
  return "?";
}

ClassifierKind parse_classifier(const std::string& s) {
  if (s == "lr") return ClassifierKind::LR;
  if (s == "svm") return ClassifierKind::SVM;
  if (s == "rf") return ClassifierKind::RF;
  throw ConfigError("unknown classifier \"" + s + "\"");
}

FeatureMatrix build_features(std::span<const LabeledSequence> sequences,
                             AggregationMode mode, const EmbeddingMatrix* emb,
                             const EmbeddingMatrix* rand_emb, uint32_t vocab_size) {
  FeatureMatrix out;
  out.rows = sequences.size();
  if (mode == AggregationMode::BofW) {
    out.cols = vocab_size;
  } else {
    const EmbeddingMatrix* source = mode == AggregationMode::RandSum ? rand_emb : emb;
    if (source == nullptr)
      throw ConfigError(std::string("representation ") + to_string(mode) +
                        " needs an embedding matrix");
    out.cols = feature_length(mode, vocab_size, source->dim);
  }
  out.data.resize(out.rows * out.cols);

  for (size_t i = 0; i < sequences.size(); ++i) {
    std::vector<double> features;
    if (mode == AggregationMode::BofW) {
      features = bag_of_words(sequences[i].indices, vocab_size);
    } else {
      const EmbeddingMatrix* source = mode == AggregationMode::RandSum ? rand_emb : emb;
      features = aggregate_embeddings(sequences[i].indices, *source, mode);
    }
    std::copy(features.begin(), features.end(), out.row_mut(i).begin());
  }
  return out;
}

namespace {

std::vector<int> split_labels(std::span<const LabeledSequence> split) {
  std::vector<int> labels;
  labels.reserve(split.size());
  for (const auto& s : split) labels.push_back(s.label);
  return labels;
}

}  // namespace

std::vector<BaselineCell> run_baseline_suite(const CohortDataset& cohort,
                                             const EmbeddingMatrix* emb,
                                             uint32_t vocab_size,
                                             const BaselineSuiteConfig& config) {
  if (cohort.train.empty() || cohort.val.empty() || cohort.test.empty())
    throw DataError("baseline suite: all three splits must be non-empty");

  const auto train_labels = split_labels(cohort.train);
  const auto val_labels = split_labels(cohort.val);
  const auto test_labels = split_labels(cohort.test);

  // RandSum draws its matrix once per suite so every cell sees the same one.
  std::optional<EmbeddingMatrix> rand_emb;
  const bool wants_rand =
      std::find(config.representations.begin(), config.representations.end(),
                AggregationMode::RandSum) != config.representations.end();
  if (wants_rand) {
    const uint32_t dim = emb ? emb->dim : 32;
    rand_emb = random_embedding_matrix(vocab_size, dim, derive_seed(config.seed, 6));
  }

  std::vector<BaselineCell> cells;
  for (const AggregationMode mode : config.representations) {
    FeatureMatrix x_train, x_val, x_test;
    try {
      x_train = build_features(cohort.train, mode, emb, rand_emb ? &*rand_emb : nullptr,
                               vocab_size);
      x_val = build_features(cohort.val, mode, emb, rand_emb ? &*rand_emb : nullptr,
                             vocab_size);
      x_test = build_features(cohort.test, mode, emb, rand_emb ? &*rand_emb : nullptr,
                              vocab_size);
    } catch (const std::runtime_error& e) {
      throw ConfigError(std::string("representation ") + to_string(mode) + ": " +
                        e.what());
    }

    for (const ClassifierKind classifier : config.classifiers) {
      BaselineCell cell;
      cell.classifier = classifier;
      cell.representation = mode;
      try {
        std::vector<double> test_scores(x_test.rows);
        if (classifier == ClassifierKind::RF) {
          const ForestModel forest =
              train_forest(x_train, train_labels, x_val, val_labels,
                           derive_seed(config.seed, 7));
          for (size_t i = 0; i < x_test.rows; ++i)
            test_scores[i] = predict_forest(forest, x_test.row(i));
        } else {
          const LossKind loss =
              classifier == ClassifierKind::LR ? LossKind::Logistic : LossKind::Hinge;
          double best_auroc = -1.0;
          LinearModel best_model;
          for (const double lambda : config.lambda_grid) {
            const LinearModel model = train_linear(x_train, train_labels, loss, lambda);
            std::vector<double> val_scores(x_val.rows);
            for (size_t i = 0; i < x_val.rows; ++i)
              val_scores[i] = predict_linear(model, x_val.row(i));
            const double score = auroc(val_scores, val_labels);
            if (score > best_auroc) {
              best_auroc = score;
              best_model = model;
              cell.chosen_lambda = lambda;
            }
          }
          for (size_t i = 0; i < x_test.rows; ++i)
            test_scores[i] = predict_linear(best_model, x_test.row(i));
        }
        cell.metrics = compute_metrics(test_scores, test_labels);
      } catch (const std::runtime_error& e) {
        throw DataError(std::string("suite cell ") + to_string(classifier) + "+" +
                        to_string(mode) + ": " + e.what());
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace ehr
