#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ehr/data_model.hpp"

namespace ehr {

struct CbowConfig {
  uint32_t dim = 200;
  uint32_t window = 20;  // per side; up to 2*window context events
  int min_count = 5;     // vocabulary threshold (applied by the caller)
  uint32_t negatives = 5;
  uint32_t epochs = 5;
  double lr_start = 0.025;
  double lr_min = 1e-4;
  double subsample_threshold = 0.0;  // 0 disables frequent-event subsampling
  uint32_t workers = 1;              // >1 enables lock-free parallel updates
  uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

struct EmbeddingMatrix {
  uint32_t dim = 0;
  std::vector<EventCode> row_codes;  // one per vocabulary index
  std::vector<double> input;         // V x dim, the published embeddings
  std::vector<double> output;        // V x dim context weights, kept for resume

  uint32_t size() const { return static_cast<uint32_t>(row_codes.size()); }
  std::span<const double> row(uint32_t i) const {
    return {input.data() + static_cast<size_t>(i) * dim, dim};
  }
  std::span<double> row_mut(uint32_t i) {
    return {input.data() + static_cast<size_t>(i) * dim, dim};
  }
};

// Draws vocabulary indices proportional to count^0.75 by inverse-CDF
// binary search, so empirical frequencies match the distribution exactly
// up to sampling noise.
class NoiseSampler {
 public:
  explicit NoiseSampler(std::span<const uint64_t> counts);
  uint32_t sample(class Rng& rng) const;
  double probability(uint32_t index) const;

 private:
  std::vector<double> cdf_;
};

// Inclusive-exclusive context bounds [begin, end) around center position t,
// clipped to the sequence; the center itself is never its own context.
std::pair<size_t, size_t> context_range(size_t t, size_t len, uint32_t window);

EmbeddingMatrix train_cbow(const std::vector<std::vector<uint32_t>>& sequences,
                           const Vocabulary& vocab, const CbowConfig& config);

// Average negative-sampling loss over all training positions, with the
// negative draws taken from a dedicated generator so the value is
// reproducible. Used to verify that training descends.
double cbow_negative_sampling_loss(const std::vector<std::vector<uint32_t>>& sequences,
                                   const EmbeddingMatrix& emb, const CbowConfig& config,
                                   uint64_t eval_seed);

// Top-k rows by cosine similarity of input vectors, excluding the query;
// ties broken by ascending index.
std::vector<std::pair<uint32_t, double>> nearest_neighbors(const EmbeddingMatrix& emb,
                                                           uint32_t query_index, int k);

// Text format: header "V D", then one row per index:
// "code kind v1 ... vD" with six digits after the decimal point.
void save_embeddings(const EmbeddingMatrix& emb, const std::string& path);
EmbeddingMatrix load_embeddings(const std::string& path);

}  // namespace ehr
