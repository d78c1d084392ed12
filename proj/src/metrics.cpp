#include "ehr/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "ehr/errors.hpp"

namespace ehr {

namespace {

void check_lengths(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw ConfigError("scores and labels have different lengths");
  if (scores.empty()) throw ConfigError("empty score list");
  for (const int y : labels)
    if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
}

// Indices sorted by descending score; equal scores stay adjacent.
std::vector<size_t> descending_order(std::span<const double> scores) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

}  // namespace

double accuracy(std::span<const double> scores, std::span<const int> labels,
                double threshold) {
  check_lengths(scores, labels);
  size_t correct = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] >= threshold ? 1 : 0;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels);
  const size_t n = scores.size();
  size_t positives = 0;
  for (const int y : labels) positives += static_cast<size_t>(y);
  const size_t negatives = n - positives;
  if (positives == 0 || negatives == 0)
    throw DataError("auroc needs both classes present");

  // Ascending by score; ties share their average rank, which makes the
  // rank-sum identical to counting tied pairs as 1/2.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });

  double positive_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) positive_rank_sum += avg_rank;
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double q = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels);
  size_t total_positives = 0;
  for (const int y : labels) total_positives += static_cast<size_t>(y);
  if (total_positives == 0) throw DataError("auprc needs at least one positive");

  const auto order = descending_order(scores);
  const size_t n = order.size();

  double area = 0.0;
  double prev_recall = 0.0;
  size_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1)
        ++tp;
      else
        ++fp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

double max_f1(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels);
  size_t total_positives = 0;
  for (const int y : labels) total_positives += static_cast<size_t>(y);
  if (total_positives == 0) throw DataError("max_f1 needs at least one positive");

  const auto order = descending_order(scores);
  const size_t n = order.size();

  double best = 0.0;
  size_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1)
        ++tp;
      else
        ++fp;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(total_positives);
    const double f1 =
        (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    best = std::max(best, f1);
    i = j;
  }
  return best;
}

MetricSet compute_metrics(std::span<const double> scores, std::span<const int> labels) {
  return MetricSet{accuracy(scores, labels), auroc(scores, labels),
                   auprc(scores, labels), max_f1(scores, labels)};
}

}  // namespace ehr
