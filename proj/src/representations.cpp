#include "ehr/representations.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "ehr/errors.hpp"
#include "ehr/rng.hpp"

namespace ehr {

const char* to_string(AggregationMode mode) {
  switch (mode) {
    case AggregationMode::BofW: return "bofw";
    case AggregationMode::W2vAve: return "w2v-ave";
    case AggregationMode::W2vSum: return "w2v-sum";
    case AggregationMode::W2vMax: return "w2v-max";
    case AggregationMode::W2vAll: return "w2v-all";
    case AggregationMode::RandSum: return "rand-sum";
  }
  return "?";
}

AggregationMode parse_aggregation_mode(const std::string& s) {
  if (s == "bofw") return AggregationMode::BofW;
  if (s == "w2v-ave") return AggregationMode::W2vAve;
  if (s == "w2v-sum") return AggregationMode::W2vSum;
  if (s == "w2v-max") return AggregationMode::W2vMax;
  if (s == "w2v-all") return AggregationMode::W2vAll;
  if (s == "rand-sum") return AggregationMode::RandSum;
  throw ConfigError("unknown representation \"" + s + "\"");
}

std::vector<double> bag_of_words(std::span<const uint32_t> seq, uint32_t vocab_size) {
  std::vector<double> counts(vocab_size, 0.0);
  for (const uint32_t idx : seq) {
    if (idx >= vocab_size) throw DataError("bag_of_words: index out of range");
    counts[idx] += 1.0;
  }
  return counts;
}

std::vector<double> aggregate_embeddings(std::span<const uint32_t> seq,
                                         const EmbeddingMatrix& emb,
                                         AggregationMode mode) {
  if (mode == AggregationMode::BofW)
    throw ConfigError("aggregate_embeddings: BofW has no embedding to aggregate");
  if (seq.empty()) throw DataError("aggregate_embeddings: empty sequence");
  const uint32_t dim = emb.dim;
  for (const uint32_t idx : seq)
    if (idx >= emb.size()) throw DataError("aggregate_embeddings: index out of range");

  // Reductions run over per-index multiplicities in ascending index order,
  // so results are exactly invariant to any reordering of seq.
  std::map<uint32_t, double> multiplicity;
  for (const uint32_t idx : seq) multiplicity[idx] += 1.0;

  std::vector<double> sum(dim, 0.0);
  const auto first_row = emb.row(multiplicity.begin()->first);
  std::vector<double> mins(first_row.begin(), first_row.end());
  std::vector<double> maxs = mins;
  for (const auto& [idx, count] : multiplicity) {
    const auto row = emb.row(idx);
    for (uint32_t d = 0; d < dim; ++d) {
      sum[d] += count * row[d];
      mins[d] = std::min(mins[d], row[d]);
      maxs[d] = std::max(maxs[d], row[d]);
    }
  }

  switch (mode) {
    case AggregationMode::W2vSum:
    case AggregationMode::RandSum:
      return sum;
    case AggregationMode::W2vAve: {
      const double inv = 1.0 / static_cast<double>(seq.size());
      for (double& x : sum) x *= inv;
      return sum;
    }
    case AggregationMode::W2vMax:
      return maxs;
    case AggregationMode::W2vAll: {
      // Fixed concatenation order [sum | min | max].
      std::vector<double> all;
      all.reserve(3 * static_cast<size_t>(dim));
      all.insert(all.end(), sum.begin(), sum.end());
      all.insert(all.end(), mins.begin(), mins.end());
      all.insert(all.end(), maxs.begin(), maxs.end());
      return all;
    }
    default:
      throw ConfigError("aggregate_embeddings: unsupported mode");
  }
}

EmbeddingMatrix random_embedding_matrix(uint32_t vocab_size, uint32_t dim,
                                        uint64_t seed) {
  EmbeddingMatrix emb;
  emb.dim = dim;
  emb.row_codes.resize(vocab_size);
  emb.input.resize(static_cast<size_t>(vocab_size) * dim);
  emb.output.assign(emb.input.size(), 0.0);
  Rng rng(seed);
  const double scale = 1.0 / static_cast<double>(dim);
  for (double& w : emb.input) w = (rng.real01() - 0.5) * scale;
  return emb;
}

size_t feature_length(AggregationMode mode, uint32_t vocab_size, uint32_t dim) {
  switch (mode) {
    case AggregationMode::BofW: return vocab_size;
    case AggregationMode::W2vAll: return 3 * static_cast<size_t>(dim);
    default: return dim;
  }
}

void write_feature_csv(const std::string& path, std::span<const std::string> ids,
                       std::span<const int> labels,
                       const std::vector<std::vector<double>>& features) {
  if (ids.size() != labels.size() || ids.size() != features.size())
    throw ConfigError("write_feature_csv: column lengths differ");
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);

  const size_t width = features.empty() ? 0 : features[0].size();
  f << "patient_id,label";
  for (size_t k = 0; k < width; ++k) f << ",f" << k;
  f << "\n";
  char buf[40];
  for (size_t i = 0; i < ids.size(); ++i) {
    if (features[i].size() != width)
      throw ConfigError("write_feature_csv: ragged feature matrix");
    f << ids[i] << "," << labels[i];
    for (const double x : features[i]) {
      std::snprintf(buf, sizeof(buf), ",%.10g", x);
      f << buf;
    }
    f << "\n";
  }
  if (!f) throw ConfigError("write failed: " + path);
}

}  // namespace ehr
