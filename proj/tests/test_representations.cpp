#include <vector>

#include "doctest.h"
#include "ehr/errors.hpp"
#include "ehr/representations.hpp"
#include "ehr/rng.hpp"
#include "test_util.hpp"

using namespace ehr;

namespace {

EmbeddingMatrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  EmbeddingMatrix emb;
  emb.dim = static_cast<uint32_t>(rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    emb.row_codes.push_back({"r" + std::to_string(i), EventKind::Diagnosis});
    emb.input.insert(emb.input.end(), rows[i].begin(), rows[i].end());
  }
  emb.output.assign(emb.input.size(), 0.0);
  return emb;
}

}  // namespace

TEST_SUITE("representations") {

TEST_CASE("bag_of_words basics") {
  CHECK(bag_of_words(std::vector<uint32_t>{}, 8627).size() == 8627);
  const auto zero = bag_of_words(std::vector<uint32_t>{}, 4);
  CHECK(zero == std::vector<double>{0, 0, 0, 0});
  const auto counts = bag_of_words(std::vector<uint32_t>{2, 2, 5}, 6);
  CHECK(counts == std::vector<double>{0, 0, 2, 0, 0, 1});
  CHECK_THROWS_AS(bag_of_words(std::vector<uint32_t>{9}, 4), DataError);
}

TEST_CASE("single-event sequence collapses every reduction to that row") {
  const auto emb = matrix_from_rows({{0.3, -0.7, 2.0}, {1.0, 1.0, 1.0}});
  const std::vector<uint32_t> seq{0};
  const std::vector<double> row{0.3, -0.7, 2.0};
  CHECK(aggregate_embeddings(seq, emb, AggregationMode::W2vAve) == row);
  CHECK(aggregate_embeddings(seq, emb, AggregationMode::W2vSum) == row);
  CHECK(aggregate_embeddings(seq, emb, AggregationMode::W2vMax) == row);
}

TEST_CASE("direct arithmetic on two rows") {
  const auto emb = matrix_from_rows({{1.0, -2.0}, {3.0, 0.0}});
  const std::vector<uint32_t> seq{0, 1};
  CHECK(aggregate_embeddings(seq, emb, AggregationMode::W2vSum) ==
        std::vector<double>{4.0, -2.0});
  CHECK(aggregate_embeddings(seq, emb, AggregationMode::W2vAve) ==
        std::vector<double>{2.0, -1.0});
  CHECK(aggregate_embeddings(seq, emb, AggregationMode::W2vMax) ==
        std::vector<double>{3.0, 0.0});
  // All concatenates [sum | min | max].
  CHECK(aggregate_embeddings(seq, emb, AggregationMode::W2vAll) ==
        std::vector<double>{4.0, -2.0, 1.0, -2.0, 3.0, 0.0});
}

TEST_CASE("w2v-all over a 200-dimensional matrix is 600 wide") {
  EmbeddingMatrix emb = random_embedding_matrix(3, 200, 5);
  const auto all =
      aggregate_embeddings(std::vector<uint32_t>{0, 2}, emb, AggregationMode::W2vAll);
  CHECK(all.size() == 600);
  CHECK(feature_length(AggregationMode::W2vAll, 3, 200) == 600);
}

TEST_CASE("aggregations are permutation invariant") {
  Rng rng(17);
  const auto emb = random_embedding_matrix(20, 7, 3);
  for (int round = 0; round < 20; ++round) {
    std::vector<uint32_t> seq;
    const size_t n = 1 + rng.below(30);
    for (size_t i = 0; i < n; ++i) seq.push_back(static_cast<uint32_t>(rng.below(20)));
    std::vector<uint32_t> shuffled = seq;
    rng.shuffle(shuffled);

    CHECK(bag_of_words(seq, 20) == bag_of_words(shuffled, 20));
    for (const auto mode : {AggregationMode::W2vAve, AggregationMode::W2vSum,
                            AggregationMode::W2vMax, AggregationMode::W2vAll})
      CHECK(aggregate_embeddings(seq, emb, mode) ==
            aggregate_embeddings(shuffled, emb, mode));
  }
}

TEST_CASE("sum is additive over concatenation") {
  Rng rng(18);
  const auto emb = random_embedding_matrix(12, 5, 4);
  std::vector<uint32_t> a, b;
  for (int i = 0; i < 9; ++i) a.push_back(static_cast<uint32_t>(rng.below(12)));
  for (int i = 0; i < 6; ++i) b.push_back(static_cast<uint32_t>(rng.below(12)));
  std::vector<uint32_t> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const auto sum_a = aggregate_embeddings(a, emb, AggregationMode::W2vSum);
  const auto sum_b = aggregate_embeddings(b, emb, AggregationMode::W2vSum);
  const auto sum_ab = aggregate_embeddings(ab, emb, AggregationMode::W2vSum);
  for (size_t d = 0; d < sum_ab.size(); ++d)
    CHECK(sum_ab[d] == doctest::Approx(sum_a[d] + sum_b[d]).epsilon(1e-12));
}

TEST_CASE("all-mode components match the independent reductions") {
  Rng rng(19);
  const auto emb = random_embedding_matrix(15, 6, 9);
  std::vector<uint32_t> seq;
  for (int i = 0; i < 11; ++i) seq.push_back(static_cast<uint32_t>(rng.below(15)));
  const auto all = aggregate_embeddings(seq, emb, AggregationMode::W2vAll);
  const auto sum = aggregate_embeddings(seq, emb, AggregationMode::W2vSum);
  const auto maxs = aggregate_embeddings(seq, emb, AggregationMode::W2vMax);
  // Columnwise min recomputed by hand.
  std::vector<double> mins(emb.dim);
  for (uint32_t d = 0; d < emb.dim; ++d) {
    double m = emb.row(seq[0])[d];
    for (const uint32_t idx : seq) m = std::min(m, emb.row(idx)[d]);
    mins[d] = m;
  }
  for (uint32_t d = 0; d < emb.dim; ++d) {
    CHECK(all[d] == sum[d]);
    CHECK(all[emb.dim + d] == mins[d]);
    CHECK(all[2 * emb.dim + d] == maxs[d]);
  }
}

TEST_CASE("empty sequence is an error for embedding reductions") {
  const auto emb = random_embedding_matrix(4, 3, 1);
  CHECK_THROWS_AS(aggregate_embeddings(std::vector<uint32_t>{}, emb,
                                       AggregationMode::W2vSum),
                  DataError);
}

TEST_CASE("random matrix is seed-stable and bounded") {
  const auto a = random_embedding_matrix(10, 8, 42);
  const auto b = random_embedding_matrix(10, 8, 42);
  const auto c = random_embedding_matrix(10, 8, 43);
  CHECK(a.input == b.input);
  CHECK(a.input != c.input);
  for (const double v : a.input) CHECK(std::abs(v) <= 0.5 / 8.0);
}

TEST_CASE("feature csv export") {
  TempDir dir;
  const std::vector<std::string> ids{"p1", "p2"};
  const std::vector<int> labels{1, 0};
  const std::vector<std::vector<double>> features{{1.5, 2.0}, {0.25, -1.0}};
  write_feature_csv(dir.file("x.csv"), ids, labels, features);
  const std::string text = read_file(dir.file("x.csv"));
  CHECK(text == "patient_id,label,f0,f1\np1,1,1.5,2\np2,0,0.25,-1\n");
}

TEST_CASE("mode names round-trip") {
  for (const auto mode : {AggregationMode::BofW, AggregationMode::W2vAve,
                          AggregationMode::W2vSum, AggregationMode::W2vMax,
                          AggregationMode::W2vAll, AggregationMode::RandSum})
    CHECK(parse_aggregation_mode(to_string(mode)) == mode);
  CHECK_THROWS_AS(parse_aggregation_mode("tfidf"), ConfigError);
}

}  // TEST_SUITE
