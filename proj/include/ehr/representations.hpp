#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ehr/embedding.hpp"

namespace ehr {

enum class AggregationMode { BofW, W2vAve, W2vSum, W2vMax, W2vAll, RandSum };

const char* to_string(AggregationMode mode);
AggregationMode parse_aggregation_mode(const std::string& s);  // throws ConfigError

// Occurrence counts per vocabulary index. Empty sequences give the zero
// vector.
std::vector<double> bag_of_words(std::span<const uint32_t> seq, uint32_t vocab_size);

// Columnwise reduction over the looked-up embedding rows. Ave/Sum/Max give
// dim values; All concatenates [sum | min | max]. RandSum is Sum applied to
// a seeded random matrix (see random_embedding_matrix), so it reduces the
// same way Sum does here. Empty sequences are an error.
std::vector<double> aggregate_embeddings(std::span<const uint32_t> seq,
                                         const EmbeddingMatrix& emb,
                                         AggregationMode mode);

// Random matrix with the same uniform(-0.5/dim, 0.5/dim) initializer the
// CBOW trainer uses, under an independent seed. Backs the RandSum mode.
EmbeddingMatrix random_embedding_matrix(uint32_t vocab_size, uint32_t dim,
                                        uint64_t seed);

size_t feature_length(AggregationMode mode, uint32_t vocab_size, uint32_t dim);

// CSV export with header "patient_id,label,f0,...,fK".
void write_feature_csv(const std::string& path, std::span<const std::string> ids,
                       std::span<const int> labels,
                       const std::vector<std::vector<double>>& features);

}  // namespace ehr
