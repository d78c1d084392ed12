#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "ehr/data_model.hpp"
#include "ehr/embedding.hpp"
#include "ehr/errors.hpp"
#include "ehr/rng.hpp"
#include "test_util.hpp"

using namespace ehr;

namespace {

// Vocabulary over codes named by their intended frequency rank.
Vocabulary toy_vocab(const std::vector<std::pair<std::string, int>>& code_counts) {
  std::vector<RawPatient> records(1);
  records[0].patient_id = "p";
  for (const auto& [code, count] : code_counts)
    for (int i = 0; i < count; ++i)
      records[0].events.push_back({code, EventKind::Diagnosis, i});
  return Vocabulary::build(records, 1);
}

double cosine(const EmbeddingMatrix& emb, uint32_t a, uint32_t b) {
  double num = 0, na = 0, nb = 0;
  for (uint32_t d = 0; d < emb.dim; ++d) {
    num += emb.row(a)[d] * emb.row(b)[d];
    na += emb.row(a)[d] * emb.row(a)[d];
    nb += emb.row(b)[d] * emb.row(b)[d];
  }
  return num / std::sqrt(na * nb);
}

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("context window clips at sequence bounds and excludes the center") {
  CHECK(context_range(0, 10, 3) == std::pair<size_t, size_t>{0, 4});
  CHECK(context_range(9, 10, 3) == std::pair<size_t, size_t>{6, 10});
  CHECK(context_range(5, 10, 3) == std::pair<size_t, size_t>{2, 9});
  CHECK(context_range(5, 10, 20) == std::pair<size_t, size_t>{0, 10});
  // The range includes the center slot; trainers skip position t itself,
  // so a length-1 sequence has no context at all.
  CHECK(context_range(0, 1, 5) == std::pair<size_t, size_t>{0, 1});
}

TEST_CASE("matrix shape follows vocabulary and dim") {
  const Vocabulary vocab = toy_vocab({{"a", 3}, {"b", 2}, {"c", 2}});
  CbowConfig config;
  config.dim = 8;
  config.epochs = 1;
  config.window = 2;
  const auto emb = train_cbow({{0, 1, 2, 0}}, vocab, config);
  CHECK(emb.size() == 3);
  CHECK(emb.dim == 8);
  CHECK(emb.input.size() == 24);
  CHECK(emb.output.size() == 24);
}

TEST_CASE("zero epochs return the untouched initialization") {
  const Vocabulary vocab = toy_vocab({{"a", 3}, {"b", 2}});
  CbowConfig config;
  config.dim = 4;
  config.epochs = 0;
  config.seed = 55;
  const auto emb1 = train_cbow({{0, 1, 0}}, vocab, config);
  const auto emb2 = train_cbow({{0, 1, 0}}, vocab, config);
  CHECK(emb1.input == emb2.input);
  for (const double v : emb1.output) CHECK(v == 0.0);
  config.epochs = 1;
  const auto trained = train_cbow({{0, 1, 0}}, vocab, config);
  CHECK(trained.input != emb1.input);
}

TEST_CASE("identical seeds give bit-identical matrices") {
  const Vocabulary vocab = toy_vocab({{"a", 9}, {"b", 6}, {"c", 5}, {"d", 4}});
  std::vector<std::vector<uint32_t>> seqs;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    std::vector<uint32_t> s;
    for (int j = 0; j < 12; ++j) s.push_back(static_cast<uint32_t>(rng.below(4)));
    seqs.push_back(std::move(s));
  }
  CbowConfig config;
  config.dim = 6;
  config.epochs = 3;
  config.window = 3;
  config.seed = 1001;
  const auto a = train_cbow(seqs, vocab, config);
  const auto b = train_cbow(seqs, vocab, config);
  CHECK(a.input == b.input);
  CHECK(a.output == b.output);
}

TEST_CASE("adjacent codes end up closer than unrelated codes") {
  // Sentences mix only {a,b} or only {c,d}, so pair mates share context
  // distributions while cross-pair codes never co-occur.
  const Vocabulary vocab = toy_vocab({{"a", 4}, {"b", 3}, {"c", 3}, {"d", 2}});
  const auto a = *vocab.index_of(EventCode{"a", EventKind::Diagnosis});
  const auto b = *vocab.index_of(EventCode{"b", EventKind::Diagnosis});
  const auto c = *vocab.index_of(EventCode{"c", EventKind::Diagnosis});
  const auto d = *vocab.index_of(EventCode{"d", EventKind::Diagnosis});

  Rng pair_rng(5);
  std::vector<std::vector<uint32_t>> seqs;
  for (int i = 0; i < 300; ++i) {
    std::vector<uint32_t> s1, s2;
    for (int j = 0; j < 12; ++j) {
      s1.push_back(pair_rng.below(2) ? a : b);
      s2.push_back(pair_rng.below(2) ? c : d);
    }
    seqs.push_back(std::move(s1));
    seqs.push_back(std::move(s2));
  }
  CbowConfig config;
  config.dim = 12;
  config.window = 3;
  config.epochs = 5;
  config.seed = 77;
  const auto emb = train_cbow(seqs, vocab, config);
  CHECK(cosine(emb, a, b) > cosine(emb, a, c));
  CHECK(cosine(emb, a, b) > 0.5);
  CHECK(cosine(emb, a, c) < 0.5);
}

TEST_CASE("training descends the negative-sampling objective") {
  const Vocabulary vocab = toy_vocab({{"a", 9}, {"b", 8}, {"c", 7}, {"d", 6}, {"e", 5}});
  std::vector<std::vector<uint32_t>> seqs;
  Rng rng(12);
  for (int i = 0; i < 60; ++i) {
    std::vector<uint32_t> s;
    const uint32_t base = static_cast<uint32_t>(rng.below(2)) * 2;
    for (int j = 0; j < 10; ++j)
      s.push_back(base + static_cast<uint32_t>(rng.below(2)));
    seqs.push_back(std::move(s));
  }
  CbowConfig config;
  config.dim = 8;
  config.window = 4;
  config.seed = 5;
  config.epochs = 0;
  const auto init = train_cbow(seqs, vocab, config);
  config.epochs = 1;
  const auto after = train_cbow(seqs, vocab, config);
  const double loss_init = cbow_negative_sampling_loss(seqs, init, config, 999);
  const double loss_after = cbow_negative_sampling_loss(seqs, after, config, 999);
  CHECK(loss_after < loss_init);
}

TEST_CASE("negative sampling matches unigram^0.75 within 1 percent") {
  const std::vector<uint64_t> counts{100, 50, 10, 5, 1};
  const NoiseSampler sampler(counts);
  std::vector<double> expected(counts.size());
  double z = 0;
  for (size_t i = 0; i < counts.size(); ++i) z += std::pow(double(counts[i]), 0.75);
  for (size_t i = 0; i < counts.size(); ++i)
    expected[i] = std::pow(double(counts[i]), 0.75) / z;

  Rng rng(321);
  std::vector<size_t> hits(counts.size(), 0);
  const size_t draws = 1000000;
  for (size_t i = 0; i < draws; ++i) hits[sampler.sample(rng)] += 1;
  for (size_t i = 0; i < counts.size(); ++i) {
    const double freq = static_cast<double>(hits[i]) / draws;
    CHECK(std::abs(freq - expected[i]) <= 0.01);
    CHECK(sampler.probability(static_cast<uint32_t>(i)) ==
          doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("nearest neighbors") {
  EmbeddingMatrix emb;
  emb.dim = 3;
  emb.row_codes = {{"a", EventKind::Diagnosis},
                   {"b", EventKind::Diagnosis},
                   {"c", EventKind::Diagnosis},
                   {"d", EventKind::Diagnosis}};
  emb.input = {1, 0, 0,   // a
               1, 0, 0,   // b: identical to a
               0, 1, 0,   // c: orthogonal
               0.5, 0.5, 0};  // d
  emb.output.assign(12, 0.0);

  SUBCASE("k=0 gives an empty list") { CHECK(nearest_neighbors(emb, 0, 0).empty()); }
  SUBCASE("identical rows rank first with cosine 1") {
    const auto nn = nearest_neighbors(emb, 0, 2);
    REQUIRE(nn.size() == 2);
    CHECK(nn[0].first == 1);
    CHECK(nn[0].second == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("negative k is an error") {
    CHECK_THROWS_AS(nearest_neighbors(emb, 0, -1), ConfigError);
  }
  SUBCASE("k must stay below the vocabulary size") {
    CHECK_THROWS_AS(nearest_neighbors(emb, 0, 4), ConfigError);
  }
}

TEST_CASE("orthogonal rows report cosine zero") {
  EmbeddingMatrix emb;
  emb.dim = 3;
  emb.row_codes = {{"a", EventKind::Diagnosis},
                   {"b", EventKind::Diagnosis},
                   {"c", EventKind::Diagnosis}};
  emb.input = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  emb.output.assign(9, 0.0);
  const auto nn = nearest_neighbors(emb, 0, 2);
  REQUIRE(nn.size() == 2);
  CHECK(nn[0].second == 0.0);
  CHECK(nn[1].second == 0.0);
  // Ties break by ascending index.
  CHECK(nn[0].first == 1);
  CHECK(nn[1].first == 2);
}

TEST_CASE("embedding file round-trip within text precision") {
  const Vocabulary vocab = toy_vocab({{"a", 3}, {"b", 2}, {"c", 2}});
  CbowConfig config;
  config.dim = 5;
  config.epochs = 2;
  config.window = 2;
  const auto emb = train_cbow({{0, 1, 2, 0, 1}}, vocab, config);

  TempDir dir;
  save_embeddings(emb, dir.file("emb.txt"));
  const auto loaded = load_embeddings(dir.file("emb.txt"));
  REQUIRE(loaded.size() == emb.size());
  REQUIRE(loaded.dim == emb.dim);
  CHECK(loaded.row_codes[0] == emb.row_codes[0]);
  double max_diff = 0;
  for (size_t i = 0; i < emb.input.size(); ++i)
    max_diff = std::max(max_diff, std::abs(emb.input[i] - loaded.input[i]));
  CHECK(max_diff <= 5e-7);
}

TEST_CASE("header and row-count mismatch is a format error") {
  TempDir dir;
  write_file(dir.file("bad.txt"),
             "10 2\n"
             "a diagnosis 0.1 0.2\n"
             "b diagnosis 0.3 0.4\n");
  CHECK_THROWS_AS(load_embeddings(dir.file("bad.txt")), DataError);
}

TEST_CASE("minimal file body is exactly one vector line") {
  EmbeddingMatrix emb;
  emb.dim = 1;
  emb.row_codes = {{"only", EventKind::Diagnosis}};
  emb.input = {0.5};
  emb.output = {0.0};
  TempDir dir;
  save_embeddings(emb, dir.file("one.txt"));
  CHECK(read_file(dir.file("one.txt")) == "1 1\nonly diagnosis 0.500000\n");
}

TEST_CASE("out-of-range sequence index is an error") {
  const Vocabulary vocab = toy_vocab({{"a", 3}, {"b", 2}});
  CbowConfig config;
  config.dim = 4;
  CHECK_THROWS_AS(train_cbow({{0, 5}}, vocab, config), DataError);
}

TEST_CASE("no trainable sequence is an error") {
  const Vocabulary vocab = toy_vocab({{"a", 3}});
  CbowConfig config;
  CHECK_THROWS_AS(train_cbow({{0}, {0}}, vocab, config), DataError);
}

TEST_CASE("frequent-event subsampling drops mass without breaking training") {
  // "filler" floods the corpus; with subsampling on, training still runs
  // and produces finite, non-initialization vectors.
  const Vocabulary vocab = toy_vocab({{"filler", 50}, {"a", 5}, {"b", 4}});
  const auto filler = *vocab.index_of(EventCode{"filler", EventKind::Diagnosis});
  const auto a = *vocab.index_of(EventCode{"a", EventKind::Diagnosis});
  const auto b = *vocab.index_of(EventCode{"b", EventKind::Diagnosis});
  std::vector<std::vector<uint32_t>> seqs;
  for (int i = 0; i < 50; ++i) {
    std::vector<uint32_t> s;
    for (int j = 0; j < 20; ++j) {
      s.push_back(filler);
      if (j % 5 == 0) s.push_back(j % 10 == 0 ? a : b);
    }
    seqs.push_back(std::move(s));
  }
  CbowConfig config;
  config.dim = 6;
  config.window = 3;
  config.epochs = 2;
  config.subsample_threshold = 1e-3;
  config.seed = 41;
  const auto emb = train_cbow(seqs, vocab, config);
  for (const double v : emb.input) CHECK(std::isfinite(v));
  config.epochs = 0;
  const auto init = train_cbow(seqs, vocab, config);
  CHECK(emb.input != init.input);
}

TEST_CASE("multi-worker mode produces finite vectors") {
  const Vocabulary vocab = toy_vocab({{"a", 9}, {"b", 8}, {"c", 7}, {"d", 6}});
  std::vector<std::vector<uint32_t>> seqs;
  Rng rng(2);
  for (int i = 0; i < 40; ++i) {
    std::vector<uint32_t> s;
    for (int j = 0; j < 15; ++j) s.push_back(static_cast<uint32_t>(rng.below(4)));
    seqs.push_back(std::move(s));
  }
  CbowConfig config;
  config.dim = 6;
  config.epochs = 2;
  config.workers = 3;
  const auto emb = train_cbow(seqs, vocab, config);
  for (const double v : emb.input) CHECK(std::isfinite(v));
}

}  // TEST_SUITE
