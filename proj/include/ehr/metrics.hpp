#pragma once

#include <span>
#include <vector>

namespace ehr {

// Scores are real-valued, labels are {0,1}. All thresholds use the
// (score >= tau) rule.

double accuracy(std::span<const double> scores, std::span<const int> labels,
                double threshold = 0.5);

// Tie-corrected pairwise concordance (Mann-Whitney form), computed via
// average ranks; equals trapezoidal ROC area exactly. Both classes required.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Average-precision step form: sum over descending distinct thresholds of
// delta-recall times precision, ties processed as one block. Needs >= 1
// positive.
double auprc(std::span<const double> scores, std::span<const int> labels);

// Maximum F1 over thresholds drawn from the distinct scores. Needs >= 1
// positive.
double max_f1(std::span<const double> scores, std::span<const int> labels);

struct MetricSet {
  double accuracy = 0.0;
  double auroc = 0.0;
  double auprc = 0.0;
  double max_f1 = 0.0;
};

MetricSet compute_metrics(std::span<const double> scores, std::span<const int> labels);

}  // namespace ehr
