#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "ehr/errors.hpp"
#include "ehr/metrics.hpp"
#include "ehr/rng.hpp"

using namespace ehr;

namespace {

// Independent O(n^2) pair-counting oracle.
double auroc_bruteforce(const std::vector<double>& s, const std::vector<int>& y) {
  double concordant = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      ++pairs;
      if (s[i] > s[j])
        concordant += 1.0;
      else if (s[i] == s[j])
        concordant += 0.5;
    }
  }
  return concordant / static_cast<double>(pairs);
}

// Exhaustive threshold enumeration oracles.
double auprc_enumeration(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  size_t total_pos = 0;
  for (const int v : y) total_pos += static_cast<size_t>(v);
  double area = 0.0, prev_recall = 0.0;
  for (const double tau : thresholds) {
    size_t tp = 0, fp = 0;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] < tau) continue;
      (y[i] == 1 ? tp : fp) += 1;
    }
    const double recall = double(tp) / double(total_pos);
    const double precision = double(tp) / double(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

double max_f1_enumeration(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double> thresholds(s.begin(), s.end());
  size_t total_pos = 0;
  for (const int v : y) total_pos += static_cast<size_t>(v);
  double best = 0.0;
  for (const double tau : thresholds) {
    size_t tp = 0, fp = 0;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] < tau) continue;
      (y[i] == 1 ? tp : fp) += 1;
    }
    const double p = double(tp) / double(tp + fp);
    const double r = double(tp) / double(total_pos);
    if (p + r > 0) best = std::max(best, 2 * p * r / (p + r));
  }
  return best;
}

// Random instance with duplicated scores and both classes present.
void random_instance(Rng& rng, std::vector<double>& s, std::vector<int>& y) {
  const size_t n = 2 + rng.below(49);
  s.resize(n);
  y.resize(n);
  for (size_t i = 0; i < n; ++i) {
    s[i] = static_cast<double>(rng.below(10)) / 10.0;  // deliberate ties
    y[i] = static_cast<int>(rng.below(2));
  }
  y[0] = 1;
  y[1] = 0;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("accuracy basics") {
  CHECK(accuracy(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}) == 1.0);
  // Boundary uses the >= rule.
  CHECK(accuracy(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 1}) == 1.0);
  CHECK(accuracy(std::vector<double>{0.9, 0.2}, std::vector<int>{1, 1}) == 0.5);
}

TEST_CASE("auroc fixed cases") {
  CHECK(auroc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}) ==
        1.0);
  CHECK(auroc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{1, 0, 1, 0}) ==
        0.5);
  CHECK(auroc(std::vector<double>{0.9, 0.8, 0.7, 0.6}, std::vector<int>{1, 0, 1, 0}) ==
        doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("auprc fixed cases") {
  CHECK(auprc(std::vector<double>{0.3, 0.9}, std::vector<int>{1, 1}) == 1.0);
  CHECK(auprc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}) ==
        1.0);
  CHECK(auprc(std::vector<double>{0.9, 0.8, 0.2}, std::vector<int>{1, 0, 1}) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("max_f1 fixed cases") {
  CHECK(max_f1(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}) ==
        1.0);
  CHECK(max_f1(std::vector<double>{0.9, 0.8, 0.2}, std::vector<int>{1, 0, 1}) ==
        doctest::Approx(0.8).epsilon(1e-14));
  CHECK(max_f1(std::vector<double>{0.9, 0.5, 0.4}, std::vector<int>{1, 0, 0}) == 1.0);
}

TEST_CASE("oracle agreement on random instances") {
  Rng rng(20240811);
  std::vector<double> s;
  std::vector<int> y;
  for (int round = 0; round < 300; ++round) {
    random_instance(rng, s, y);
    CHECK(std::abs(auroc(s, y) - auroc_bruteforce(s, y)) <= 1e-12);
    CHECK(std::abs(auprc(s, y) - auprc_enumeration(s, y)) <= 1e-12);
    CHECK(std::abs(max_f1(s, y) - max_f1_enumeration(s, y)) <= 1e-12);
  }
}

TEST_CASE("monotone transform invariance") {
  Rng rng(7);
  std::vector<double> s;
  std::vector<int> y;
  for (int round = 0; round < 30; ++round) {
    random_instance(rng, s, y);
    std::vector<double> t(s.size());
    for (size_t i = 0; i < s.size(); ++i) t[i] = std::exp(3.0 * s[i]) + 1.0;
    CHECK(auroc(s, y) == doctest::Approx(auroc(t, y)).epsilon(1e-12));
    CHECK(auprc(s, y) == doctest::Approx(auprc(t, y)).epsilon(1e-12));
    CHECK(max_f1(s, y) == doctest::Approx(max_f1(t, y)).epsilon(1e-12));
  }
}

TEST_CASE("label flip symmetry without ties") {
  Rng rng(8);
  for (int round = 0; round < 30; ++round) {
    const size_t n = 4 + rng.below(30);
    std::vector<double> s(n);
    for (size_t i = 0; i < n; ++i) s[i] = static_cast<double>(i) + rng.real01() * 0.5;
    rng.shuffle(s);
    std::vector<int> y(n), flipped(n);
    for (size_t i = 0; i < n; ++i) y[i] = static_cast<int>(rng.below(2));
    y[0] = 1;
    y[1] = 0;
    for (size_t i = 0; i < n; ++i) flipped[i] = 1 - y[i];
    CHECK(auroc(s, y) == doctest::Approx(1.0 - auroc(s, flipped)).epsilon(1e-12));
  }
}

TEST_CASE("error paths") {
  CHECK_THROWS_AS(auroc(std::vector<double>{0.5, 0.4}, std::vector<int>{1, 1}),
                  DataError);
  CHECK_THROWS_AS(auprc(std::vector<double>{0.5}, std::vector<int>{0}), DataError);
  CHECK_THROWS_AS(max_f1(std::vector<double>{0.5}, std::vector<int>{0}), DataError);
  CHECK_THROWS_AS(accuracy(std::vector<double>{}, std::vector<int>{}), ConfigError);
  CHECK_THROWS_AS(accuracy(std::vector<double>{0.5}, std::vector<int>{1, 0}),
                  ConfigError);
}

}  // TEST_SUITE
