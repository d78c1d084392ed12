#include "ehr/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "ehr/errors.hpp"
#include "ehr/metrics.hpp"
#include "ehr/rng.hpp"
#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace ehr {

const char* to_string(EmbeddingInputMode mode) {
  switch (mode) {
    case EmbeddingInputMode::W2vFixed: return "w2v-fixed";
    case EmbeddingInputMode::W2vFinetune: return "w2v-finetune";
    case EmbeddingInputMode::Rand: return "rand";
    case EmbeddingInputMode::Raw: return "raw";
    case EmbeddingInputMode::Both: return "both";
  }
  return "?";
}

EmbeddingInputMode parse_input_mode(const std::string& s) {
  if (s == "w2v-fixed") return EmbeddingInputMode::W2vFixed;
  if (s == "w2v-finetune") return EmbeddingInputMode::W2vFinetune;
  if (s == "rand") return EmbeddingInputMode::Rand;
  if (s == "raw") return EmbeddingInputMode::Raw;
  if (s == "both") return EmbeddingInputMode::Both;
  throw ConfigError("unknown input mode \"" + s + "\"");
}

bool input_mode_needs_pretrained(EmbeddingInputMode mode) {
  return mode == EmbeddingInputMode::W2vFixed ||
         mode == EmbeddingInputMode::W2vFinetune || mode == EmbeddingInputMode::Both;
}

void CnnConfig::validate() const {
  if (banks.empty()) throw ConfigError("cnn: need at least one filter bank");
  for (const auto& [f, k] : banks)
    if (f < 1 || k < 1) throw ConfigError("cnn: filter size and count must be >= 1");
  if (!input_mode_needs_pretrained(input_mode) && dim < 1)
    throw ConfigError("cnn: dim must be >= 1");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  if (patience < 1 || patience > max_epochs)
    throw ConfigError("train: need 1 <= patience <= max_epochs");
}

CnnModel init_cnn(const CnnConfig& config, uint32_t vocab_size,
                  const EmbeddingMatrix* pretrained) {
  config.validate();
  if (vocab_size == 0) throw ConfigError("cnn: vocab_size must be positive");
  if (input_mode_needs_pretrained(config.input_mode)) {
    if (pretrained == nullptr)
      throw ConfigError("cnn: input mode requires pretrained embeddings");
    if (pretrained->size() != vocab_size)
      throw ConfigError("cnn: embedding rows do not match vocabulary size");
  }

  CnnModel m;
  m.input_mode = config.input_mode;
  m.vocab_size = vocab_size;

  Rng rng(config.seed);
  const auto uniform = [&rng](std::vector<double>& w, double bound) {
    for (double& x : w) x = (rng.real01() * 2.0 - 1.0) * bound;
  };

  switch (config.input_mode) {
    case EmbeddingInputMode::W2vFixed:
    case EmbeddingInputMode::W2vFinetune:
      m.emb_dim = pretrained->dim;
      m.embedding = pretrained->input;
      break;
    case EmbeddingInputMode::Both:
      m.emb_dim = pretrained->dim;
      m.embedding_frozen = pretrained->input;
      m.embedding = pretrained->input;
      break;
    case EmbeddingInputMode::Rand:
      m.emb_dim = config.dim;
      m.embedding.resize(static_cast<size_t>(vocab_size) * config.dim);
      // Same initializer family as the embedding trainer.
      uniform(m.embedding, 0.5 / static_cast<double>(config.dim));
      break;
    case EmbeddingInputMode::Raw:
      m.emb_dim = config.dim;
      m.embedding.resize(static_cast<size_t>(vocab_size) * config.dim);
      // The projection is a dense layer applied to one-hot rows, so its
      // fan-in is the vocabulary size.
      uniform(m.embedding,
              std::sqrt(6.0 / (static_cast<double>(vocab_size) + config.dim)));
      break;
  }

  const uint32_t d_in = m.input_width();
  for (const auto& [f, k] : config.banks) {
    Conv1dBank bank;
    bank.filter_size = f;
    bank.filter_count = k;
    bank.weights.resize(static_cast<size_t>(k) * f * d_in);
    const double fan_in = static_cast<double>(f) * d_in;
    uniform(bank.weights, std::sqrt(6.0 / (fan_in + k)));
    bank.bias.assign(k, 0.0);
    m.banks.push_back(std::move(bank));
  }

  const uint32_t pooled = m.pooled_width();
  m.dense_w.resize(static_cast<size_t>(pooled) * 2);
  uniform(m.dense_w, std::sqrt(6.0 / (pooled + 2.0)));
  m.dense_b.assign(2, 0.0);
  return m;
}

std::vector<double> conv1d_forward(std::span<const double> x, uint32_t t_len,
                                   uint32_t d_in, const Conv1dBank& bank) {
  const uint32_t f_len = bank.filter_size;
  const uint32_t k_count = bank.filter_count;
  if (t_len < f_len)
    throw ConfigError("conv1d: sequence shorter than the filter; pad first");
  if (x.size() != static_cast<size_t>(t_len) * d_in)
    throw ConfigError("conv1d: input size does not match T x D_in");
  if (bank.weights.size() != static_cast<size_t>(k_count) * f_len * d_in)
    throw ConfigError("conv1d: weight shape does not match the bank");

  const uint32_t out_len = t_len - f_len + 1;
  std::vector<double> out(static_cast<size_t>(out_len) * k_count);
  for (uint32_t t = 0; t < out_len; ++t) {
    const double* window = x.data() + static_cast<size_t>(t) * d_in;
    double* out_row = out.data() + static_cast<size_t>(t) * k_count;
    for (uint32_t k = 0; k < k_count; ++k) {
      const double* w = bank.weights.data() + static_cast<size_t>(k) * f_len * d_in;
      double acc = bank.bias[k];
      const size_t span = static_cast<size_t>(f_len) * d_in;
      for (size_t i = 0; i < span; ++i) acc += w[i] * window[i];
      out_row[k] = acc;
    }
  }
  return out;
}

PoolResult max_pool_time(std::span<const double> y, uint32_t rows, uint32_t cols,
                         std::span<const uint8_t> valid) {
  if (y.size() != static_cast<size_t>(rows) * cols)
    throw ConfigError("max_pool_time: input size does not match rows x cols");
  if (valid.size() != rows)
    throw ConfigError("max_pool_time: mask length does not match rows");

  PoolResult result;
  result.pooled.assign(cols, 0.0);
  result.argmax.assign(cols, 0);
  bool any = false;
  for (uint32_t t = 0; t < rows; ++t) {
    if (!valid[t]) continue;
    const double* row = y.data() + static_cast<size_t>(t) * cols;
    if (!any) {
      for (uint32_t k = 0; k < cols; ++k) {
        result.pooled[k] = row[k];
        result.argmax[k] = t;
      }
      any = true;
      continue;
    }
    for (uint32_t k = 0; k < cols; ++k) {
      if (row[k] > result.pooled[k]) {  // strict: earliest row wins ties
        result.pooled[k] = row[k];
        result.argmax[k] = t;
      }
    }
  }
  if (!any) throw DataError("max_pool_time: every position is masked");
  return result;
}

namespace {

struct ForwardScratch {
  std::vector<double> x;        // t_eff x d_in, zero rows beyond the sequence
  std::vector<double> conv;     // reused per bank
  std::vector<uint8_t> valid;
  std::vector<double> pooled;   // concatenated across banks
  std::vector<uint32_t> argmax;
  uint32_t t_real = 0;
  uint32_t t_eff = 0;
  std::array<double, 2> probs{0.5, 0.5};
};

// pad_to lets the trainer pad every batch member to the batch's longest
// sequence; the extra rows are masked out of pooling so results match the
// unpadded forward bit for bit.
void forward_one(const CnnModel& m, std::span<const uint32_t> seq, uint32_t pad_to,
                 ForwardScratch& s) {
  if (seq.empty()) throw DataError("forward: empty sequence");
  const uint32_t d_in = m.input_width();
  const uint32_t d = m.emb_dim;
  s.t_real = static_cast<uint32_t>(seq.size());
  s.t_eff = std::max({s.t_real, m.max_filter_size(), pad_to});

  s.x.assign(static_cast<size_t>(s.t_eff) * d_in, 0.0);
  const bool both = m.input_mode == EmbeddingInputMode::Both;
  for (uint32_t i = 0; i < s.t_real; ++i) {
    const uint32_t idx = seq[i];
    if (idx >= m.vocab_size) throw DataError("forward: index out of vocabulary range");
    double* row = s.x.data() + static_cast<size_t>(i) * d_in;
    if (both) {
      std::memcpy(row, m.embedding_frozen.data() + static_cast<size_t>(idx) * d,
                  sizeof(double) * d);
      std::memcpy(row + d, m.embedding.data() + static_cast<size_t>(idx) * d,
                  sizeof(double) * d);
    } else {
      std::memcpy(row, m.embedding.data() + static_cast<size_t>(idx) * d,
                  sizeof(double) * d);
    }
  }

  const uint32_t pooled_width = m.pooled_width();
  s.pooled.assign(pooled_width, 0.0);
  s.argmax.assign(pooled_width, 0);

  uint32_t offset = 0;
  for (const auto& bank : m.banks) {
    const uint32_t f_len = bank.filter_size;
    const uint32_t k_count = bank.filter_count;
    const uint32_t out_len = s.t_eff - f_len + 1;
    // Windows may touch pad rows only when the sequence itself is shorter
    // than the filter; then exactly one window (the padded prefix) counts.
    const uint32_t valid_len = std::max(s.t_real, f_len) - f_len + 1;

    s.conv = conv1d_forward(s.x, s.t_eff, d_in, bank);
    for (double& v : s.conv) v = std::tanh(v);
    s.valid.assign(out_len, 0);
    for (uint32_t t = 0; t < valid_len; ++t) s.valid[t] = 1;

    PoolResult pr = max_pool_time(s.conv, out_len, k_count, s.valid);
    std::copy(pr.pooled.begin(), pr.pooled.end(), s.pooled.begin() + offset);
    std::copy(pr.argmax.begin(), pr.argmax.end(), s.argmax.begin() + offset);
    offset += k_count;
  }

  double logits[2] = {m.dense_b[0], m.dense_b[1]};
  for (uint32_t j = 0; j < pooled_width; ++j) {
    logits[0] += m.dense_w[j * 2 + 0] * s.pooled[j];
    logits[1] += m.dense_w[j * 2 + 1] * s.pooled[j];
  }
  const double peak = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - peak);
  const double e1 = std::exp(logits[1] - peak);
  const double z = e0 + e1;
  s.probs = {e0 / z, e1 / z};
}

}  // namespace

std::array<double, 2> forward(const CnnModel& model, std::span<const uint32_t> seq) {
  ForwardScratch s;
  forward_one(model, seq, 0, s);
  return s.probs;
}

std::array<double, 2> forward_padded(const CnnModel& model,
                                     std::span<const uint32_t> seq,
                                     uint32_t pad_count) {
  ForwardScratch s;
  forward_one(model, seq, static_cast<uint32_t>(seq.size()) + pad_count, s);
  return s.probs;
}

double predict_case_probability(const CnnModel& model, std::span<const uint32_t> seq) {
  return forward(model, seq)[1];
}

CnnGradients zero_gradients(const CnnModel& model) {
  CnnGradients g;
  if (model.embedding_trainable()) g.embedding.assign(model.embedding.size(), 0.0);
  for (const auto& bank : model.banks) {
    g.bank_weights.emplace_back(bank.weights.size(), 0.0);
    g.bank_bias.emplace_back(bank.bias.size(), 0.0);
  }
  g.dense_w.assign(model.dense_w.size(), 0.0);
  g.dense_b.assign(model.dense_b.size(), 0.0);
  return g;
}

double cnn_batch_backward(const CnnModel& model, std::span<const Example> batch,
                          CnnGradients& grads) {
  if (batch.empty()) throw ConfigError("backward: empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const uint32_t d_in = model.input_width();
  const uint32_t d = model.emb_dim;
  const uint32_t pooled_width = model.pooled_width();
  const bool both = model.input_mode == EmbeddingInputMode::Both;
  const bool train_emb = model.embedding_trainable();
  // Trainable columns of the input rows: the fine-tuned copy sits to the
  // right of the frozen one in Both mode.
  const uint32_t col0 = both ? d : 0;

  uint32_t pad_to = 0;
  for (const auto& ex : batch)
    pad_to = std::max(pad_to, static_cast<uint32_t>(ex.indices.size()));

  ForwardScratch s;
  std::vector<double> dpooled(pooled_width);
  double loss = 0.0;

  for (const auto& ex : batch) {
    if (ex.label != 0 && ex.label != 1) throw DataError("backward: label must be 0 or 1");
    forward_one(model, ex.indices, pad_to, s);
    loss -= std::log(std::max(s.probs[ex.label], 1e-300));

    const double dlog[2] = {(s.probs[0] - (ex.label == 0 ? 1.0 : 0.0)) * inv_b,
                            (s.probs[1] - (ex.label == 1 ? 1.0 : 0.0)) * inv_b};
    grads.dense_b[0] += dlog[0];
    grads.dense_b[1] += dlog[1];
    for (uint32_t j = 0; j < pooled_width; ++j) {
      grads.dense_w[j * 2 + 0] += s.pooled[j] * dlog[0];
      grads.dense_w[j * 2 + 1] += s.pooled[j] * dlog[1];
      dpooled[j] = model.dense_w[j * 2 + 0] * dlog[0] + model.dense_w[j * 2 + 1] * dlog[1];
    }

    // Gradient flows only through each filter's recorded argmax window.
    uint32_t offset = 0;
    for (size_t bi = 0; bi < model.banks.size(); ++bi) {
      const auto& bank = model.banks[bi];
      const uint32_t f_len = bank.filter_size;
      for (uint32_t k = 0; k < bank.filter_count; ++k) {
        const double a = s.pooled[offset + k];
        const double dpre = dpooled[offset + k] * (1.0 - a * a);
        grads.bank_bias[bi][k] += dpre;
        const uint32_t t_star = s.argmax[offset + k];
        for (uint32_t f = 0; f < f_len; ++f) {
          const uint32_t row = t_star + f;
          if (row >= s.t_real) continue;  // pad row: all-zero, no parameters
          const double* xrow = s.x.data() + static_cast<size_t>(row) * d_in;
          double* gw =
              grads.bank_weights[bi].data() + (static_cast<size_t>(k) * f_len + f) * d_in;
          for (uint32_t dd = 0; dd < d_in; ++dd) gw[dd] += dpre * xrow[dd];
          if (train_emb) {
            const double* w =
                bank.weights.data() + (static_cast<size_t>(k) * f_len + f) * d_in;
            double* gtab =
                grads.embedding.data() + static_cast<size_t>(ex.indices[row]) * d;
            for (uint32_t dd = 0; dd < d; ++dd) gtab[dd] += dpre * w[col0 + dd];
          }
        }
      }
      offset += bank.filter_count;
    }
  }
  return loss * inv_b;
}

void adadelta_step(std::span<double> params, std::span<const double> grads,
                   AdaDeltaState& state) {
  if (params.size() != grads.size())
    throw ConfigError("adadelta: parameter and gradient sizes differ");
  if (state.eg2.empty()) {
    state.eg2.assign(params.size(), 0.0);
    state.edx2.assign(params.size(), 0.0);
  }
  if (state.eg2.size() != params.size())
    throw ConfigError("adadelta: state size does not match parameters");

  const double rho = state.rho;
  const double eps = state.eps;
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    if (!std::isfinite(g)) throw NumericError("adadelta: non-finite gradient");
    state.eg2[i] = rho * state.eg2[i] + (1.0 - rho) * g * g;
    const double dx = -std::sqrt(state.edx2[i] + eps) / std::sqrt(state.eg2[i] + eps) * g;
    state.edx2[i] = rho * state.edx2[i] + (1.0 - rho) * dx * dx;
    params[i] += dx;
  }
}

namespace {

struct ParamView {
  std::span<double> params;
  std::span<double> grads;
};

std::vector<ParamView> parameter_groups(CnnModel& m, CnnGradients& g) {
  std::vector<ParamView> groups;
  if (m.embedding_trainable()) groups.push_back({m.embedding, g.embedding});
  for (size_t i = 0; i < m.banks.size(); ++i) {
    groups.push_back({m.banks[i].weights, g.bank_weights[i]});
    groups.push_back({m.banks[i].bias, g.bank_bias[i]});
  }
  groups.push_back({m.dense_w, g.dense_w});
  groups.push_back({m.dense_b, g.dense_b});
  return groups;
}

}  // namespace

TrainResult train_cnn(const CohortDataset& data, uint32_t vocab_size,
                      const CnnConfig& model_config, const TrainConfig& train_config,
                      const EmbeddingMatrix* pretrained, const CnnModel* init_override) {
  model_config.validate();
  train_config.validate();
  if (data.train.empty() || data.val.empty())
    throw DataError("train: train and val splits must be non-empty");

  uint32_t max_index = 0;
  for (const auto* split : {&data.train, &data.val, &data.test})
    for (const auto& s : *split)
      for (const uint32_t idx : s.indices) max_index = std::max(max_index, idx);
  uint32_t v = vocab_size;
  if (input_mode_needs_pretrained(model_config.input_mode)) {
    if (pretrained == nullptr)
      throw ConfigError("train: input mode requires pretrained embeddings");
    v = pretrained->size();
  }
  if (v == 0) v = max_index + 1;
  if (max_index >= v) throw DataError("train: cohort index exceeds vocabulary size");

  CnnModel model =
      init_override ? *init_override : init_cnn(model_config, v, pretrained);
  CnnGradients grads = zero_gradients(model);
  std::vector<AdaDeltaState> states(parameter_groups(model, grads).size());

  std::vector<size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(train_config.seed);

  std::vector<int> val_labels;
  val_labels.reserve(data.val.size());
  for (const auto& s : data.val) val_labels.push_back(s.label);

  TrainResult result;
  result.model = model;
  double best_auroc = -1.0;
  uint32_t stale = 0;

  for (uint32_t epoch = 1; epoch <= train_config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += train_config.batch_size) {
      const size_t stop = std::min(order.size(), start + train_config.batch_size);
      std::vector<Example> batch;
      batch.reserve(stop - start);
      for (size_t i = start; i < stop; ++i)
        batch.push_back({data.train[order[i]].indices, data.train[order[i]].label});

      grads = zero_gradients(model);
      const double loss = cnn_batch_backward(model, batch, grads);
      if (!std::isfinite(loss))
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
      epoch_loss += loss * static_cast<double>(batch.size());

      auto groups = parameter_groups(model, grads);
      for (size_t gi = 0; gi < groups.size(); ++gi)
        adadelta_step(groups[gi].params, groups[gi].grads, states[gi]);
    }

    std::vector<double> val_scores;
    val_scores.reserve(data.val.size());
    for (const auto& s : data.val)
      val_scores.push_back(predict_case_probability(model, s.indices));
    const double val_auroc = auroc(val_scores, val_labels);

    result.history.push_back(
        {epoch_loss / static_cast<double>(order.size()), val_auroc});

    if (val_auroc > best_auroc) {
      best_auroc = val_auroc;
      result.model = model;
      result.best_epoch = epoch;
      stale = 0;
    } else {
      ++stale;
      if (stale >= train_config.patience) break;
    }
  }
  return result;
}

double gradient_check(const CnnModel& model, const Example& example, double step,
                      uint64_t seed) {
  if (!(step > 0.0)) throw ConfigError("gradient_check: step must be positive");

  CnnModel work = model;
  CnnGradients grads = zero_gradients(work);
  const Example batch[1] = {example};
  cnn_batch_backward(work, batch, grads);

  const auto loss_at = [&work, &example]() {
    ForwardScratch s;
    forward_one(work, example.indices, 0, s);
    return -std::log(std::max(s.probs[example.label], 1e-300));
  };

  Rng rng(seed);
  double worst = 0.0;
  auto groups = parameter_groups(work, grads);
  for (auto& group : groups) {
    const size_t n = group.params.size();
    std::vector<size_t> coords(n);
    std::iota(coords.begin(), coords.end(), size_t{0});
    if (n > 200) {
      rng.shuffle(coords);
      coords.resize(200);
    }
    for (const size_t c : coords) {
      const double original = group.params[c];
      group.params[c] = original + step;
      const double up = loss_at();
      group.params[c] = original - step;
      const double down = loss_at();
      group.params[c] = original;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = group.grads[c];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

namespace {

template <typename T>
void write_pod(std::ofstream& f, const T* ptr, size_t n = 1) {
  f.write(reinterpret_cast<const char*>(ptr), sizeof(T) * n);
}

template <typename T>
void read_pod(std::ifstream& f, T* ptr, size_t n = 1) {
  f.read(reinterpret_cast<char*>(ptr), sizeof(T) * n);
}

constexpr char kMagic[8] = {'E', 'H', 'R', 'C', 'N', 'N', '1', '\0'};
constexpr uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const CnnModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);

  write_pod(f, kMagic, 8);
  write_pod(f, &kVersion);
  const uint8_t mode = static_cast<uint8_t>(model.input_mode);
  write_pod(f, &mode);
  write_pod(f, &model.vocab_size);
  write_pod(f, &model.emb_dim);
  const uint32_t n_banks = static_cast<uint32_t>(model.banks.size());
  write_pod(f, &n_banks);
  for (const auto& bank : model.banks) {
    write_pod(f, &bank.filter_size);
    write_pod(f, &bank.filter_count);
  }
  const uint32_t dense_in = model.pooled_width();
  const uint32_t dense_out = 2;
  write_pod(f, &dense_in);
  write_pod(f, &dense_out);

  if (model.input_mode == EmbeddingInputMode::Both)
    write_pod(f, model.embedding_frozen.data(), model.embedding_frozen.size());
  write_pod(f, model.embedding.data(), model.embedding.size());
  for (const auto& bank : model.banks) {
    write_pod(f, bank.weights.data(), bank.weights.size());
    write_pod(f, bank.bias.data(), bank.bias.size());
  }
  write_pod(f, model.dense_w.data(), model.dense_w.size());
  write_pod(f, model.dense_b.data(), model.dense_b.size());
  if (!f) throw ConfigError("write failed: " + path);

  nlohmann::json banks = nlohmann::json::array();
  for (const auto& bank : model.banks)
    banks.push_back({bank.filter_size, bank.filter_count});
  const nlohmann::json sidecar{{"magic", "EHRCNN1"},
                               {"version", kVersion},
                               {"input_mode", to_string(model.input_mode)},
                               {"vocab_size", model.vocab_size},
                               {"dim", model.emb_dim},
                               {"banks", banks},
                               {"dense", {dense_in, dense_out}}};
  std::ofstream jf(path + ".json");
  if (!jf) throw ConfigError("cannot open for writing: " + path + ".json");
  jf << sidecar.dump(2) << "\n";
}

CnnModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open checkpoint: " + path);

  char magic[8];
  read_pod(f, magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw DataError(path + ": not a model checkpoint");
  uint32_t version = 0;
  read_pod(f, &version);
  if (version != kVersion)
    throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));

  CnnModel m;
  uint8_t mode = 0;
  read_pod(f, &mode);
  if (mode > static_cast<uint8_t>(EmbeddingInputMode::Both))
    throw DataError(path + ": bad input mode");
  m.input_mode = static_cast<EmbeddingInputMode>(mode);
  read_pod(f, &m.vocab_size);
  read_pod(f, &m.emb_dim);
  uint32_t n_banks = 0;
  read_pod(f, &n_banks);
  if (m.vocab_size == 0 || m.emb_dim == 0 || n_banks == 0 || n_banks > 64)
    throw DataError(path + ": corrupt header");
  for (uint32_t i = 0; i < n_banks; ++i) {
    Conv1dBank bank;
    read_pod(f, &bank.filter_size);
    read_pod(f, &bank.filter_count);
    if (bank.filter_size == 0 || bank.filter_count == 0)
      throw DataError(path + ": corrupt bank descriptor");
    m.banks.push_back(std::move(bank));
  }
  uint32_t dense_in = 0, dense_out = 0;
  read_pod(f, &dense_in);
  read_pod(f, &dense_out);
  if (!f) throw DataError(path + ": truncated header");
  if (dense_out != 2 || dense_in != m.pooled_width())
    throw DataError(path + ": dense dimensions do not match the banks");

  const size_t table = static_cast<size_t>(m.vocab_size) * m.emb_dim;
  const uint32_t d_in = m.input_width();
  if (m.input_mode == EmbeddingInputMode::Both) {
    m.embedding_frozen.resize(table);
    read_pod(f, m.embedding_frozen.data(), table);
  }
  m.embedding.resize(table);
  read_pod(f, m.embedding.data(), table);
  for (auto& bank : m.banks) {
    bank.weights.resize(static_cast<size_t>(bank.filter_count) * bank.filter_size * d_in);
    bank.bias.resize(bank.filter_count);
    read_pod(f, bank.weights.data(), bank.weights.size());
    read_pod(f, bank.bias.data(), bank.bias.size());
  }
  m.dense_w.resize(static_cast<size_t>(dense_in) * 2);
  m.dense_b.resize(2);
  read_pod(f, m.dense_w.data(), m.dense_w.size());
  read_pod(f, m.dense_b.data(), m.dense_b.size());
  if (!f) throw DataError(path + ": truncated body");
  f.peek();
  if (!f.eof()) throw DataError(path + ": trailing bytes after body");
  return m;
}

}  // namespace ehr
