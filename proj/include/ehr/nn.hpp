#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ehr/cohort.hpp"
#include "ehr/embedding.hpp"

namespace ehr {

// How the T x D input matrix is produced from an index sequence.
//   W2vFixed    pretrained rows, frozen
//   W2vFinetune pretrained rows, trainable
//   Rand        random-init rows, trainable
//   Raw         one-hot rows times a trainable projection, realized as an
//               index-select so the T x V one-hot matrix never exists
//   Both        frozen and fine-tuned copies concatenated columnwise (2D)
enum class EmbeddingInputMode : uint8_t {
  W2vFixed = 0,
  W2vFinetune = 1,
  Rand = 2,
  Raw = 3,
  Both = 4,
};

const char* to_string(EmbeddingInputMode mode);
EmbeddingInputMode parse_input_mode(const std::string& s);  // throws ConfigError
bool input_mode_needs_pretrained(EmbeddingInputMode mode);

struct Conv1dBank {
  uint32_t filter_size = 3;   // F, in events
  uint32_t filter_count = 1;  // K
  std::vector<double> weights;  // K x F x D_in, row-major
  std::vector<double> bias;     // K
};

struct CnnConfig {
  EmbeddingInputMode input_mode = EmbeddingInputMode::Rand;
  uint32_t dim = 16;  // table width for Rand/Raw; W2v modes take the matrix's
  std::vector<std::pair<uint32_t, uint32_t>> banks = {{3, 100}, {4, 100}, {5, 100}};
  uint64_t seed = 1;

  void validate() const;
};

struct TrainConfig {
  uint32_t batch_size = 32;
  uint32_t max_epochs = 100;
  uint32_t patience = 10;  // epochs without validation-AUROC improvement
  uint64_t seed = 1;

  void validate() const;
};

struct CnnModel {
  EmbeddingInputMode input_mode = EmbeddingInputMode::Rand;
  uint32_t vocab_size = 0;
  uint32_t emb_dim = 0;                  // width of one table
  std::vector<double> embedding;         // V x D; the trainable table
  std::vector<double> embedding_frozen;  // V x D; Both mode only
  std::vector<Conv1dBank> banks;
  std::vector<double> dense_w;  // pooled_width x 2
  std::vector<double> dense_b;  // 2

  uint32_t input_width() const {
    return input_mode == EmbeddingInputMode::Both ? 2 * emb_dim : emb_dim;
  }
  uint32_t pooled_width() const {
    uint32_t k = 0;
    for (const auto& b : banks) k += b.filter_count;
    return k;
  }
  uint32_t max_filter_size() const {
    uint32_t f = 1;
    for (const auto& b : banks) f = std::max(f, b.filter_size);
    return f;
  }
  bool embedding_trainable() const {
    return input_mode != EmbeddingInputMode::W2vFixed;
  }
};

CnnModel init_cnn(const CnnConfig& config, uint32_t vocab_size,
                  const EmbeddingMatrix* pretrained);

// Pre-activation conv over the temporal dimension only:
// out[t,k] = bias[k] + sum_{f,d} weights[k,f,d] * x[t+f,d], t in [0, T-F].
// X is T x d_in row-major; T < F is a geometry error.
std::vector<double> conv1d_forward(std::span<const double> x, uint32_t t_len,
                                   uint32_t d_in, const Conv1dBank& bank);

// Max over unmasked rows per column; valid[t] == true keeps row t. Records
// the earliest argmax row per column for the backward pass.
struct PoolResult {
  std::vector<double> pooled;   // K
  std::vector<uint32_t> argmax;  // K
};
PoolResult max_pool_time(std::span<const double> y, uint32_t rows, uint32_t cols,
                         std::span<const uint8_t> valid);

// Class probabilities for one sequence. Sequences shorter than the largest
// filter are right-padded with an all-zero row that never wins pooling.
std::array<double, 2> forward(const CnnModel& model, std::span<const uint32_t> seq);

// forward with pad_count extra pad rows appended; bit-identical to forward
// because pads are zero rows masked out of pooling.
std::array<double, 2> forward_padded(const CnnModel& model,
                                     std::span<const uint32_t> seq,
                                     uint32_t pad_count);

struct CnnGradients {
  std::vector<double> embedding;  // empty when the table is frozen
  std::vector<std::vector<double>> bank_weights;
  std::vector<std::vector<double>> bank_bias;
  std::vector<double> dense_w;
  std::vector<double> dense_b;
};

CnnGradients zero_gradients(const CnnModel& model);

struct Example {
  std::span<const uint32_t> indices;
  int label = 0;
};

// Mean cross-entropy over the batch plus exact analytic gradients,
// accumulated into grads (caller zeroes them).
double cnn_batch_backward(const CnnModel& model, std::span<const Example> batch,
                          CnnGradients& grads);

struct AdaDeltaState {
  double rho = 0.95;
  double eps = 1e-6;
  std::vector<double> eg2;   // E[g^2]
  std::vector<double> edx2;  // E[dx^2]
};

// Per-scalar update: E[g2] <- rho E[g2] + (1-rho) g^2;
// dx = -sqrt(E[dx2]+eps)/sqrt(E[g2]+eps) * g; E[dx2] likewise; x += dx.
// Lazily sizes the accumulators on first use; non-finite g fails fast.
void adadelta_step(std::span<double> params, std::span<const double> grads,
                   AdaDeltaState& state);

struct EpochStats {
  double train_loss = 0.0;
  double val_auroc = 0.0;
};

struct TrainResult {
  CnnModel model;  // parameters from the best validation epoch
  std::vector<EpochStats> history;
  uint32_t best_epoch = 0;  // 1-based; 0 = never improved
};

// Seeded shuffling each epoch, batches padded to the batch's longest
// sequence with masked pad positions, AdaDelta on every trainable group,
// early stopping on validation AUROC. init_override, when given, replaces
// the seeded initialization (checkpoint resume).
TrainResult train_cnn(const CohortDataset& data, uint32_t vocab_size,
                      const CnnConfig& model_config, const TrainConfig& train_config,
                      const EmbeddingMatrix* pretrained,
                      const CnnModel* init_override = nullptr);

// Max relative error between analytic and central finite-difference
// gradients over every trainable group, sub-sampled to at most 200
// coordinates per group.
double gradient_check(const CnnModel& model, const Example& example,
                      double step = 1e-5, uint64_t seed = 1234);

double predict_case_probability(const CnnModel& model, std::span<const uint32_t> seq);

// Binary little-endian checkpoint with a JSON sidecar at path + ".json".
void save_checkpoint(const CnnModel& model, const std::string& path);
CnnModel load_checkpoint(const std::string& path);

}  // namespace ehr
