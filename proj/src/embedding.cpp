#include "ehr/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "ehr/errors.hpp"
#include "ehr/rng.hpp"

namespace ehr {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double dot(const double* a, const double* b, uint32_t dim) {
  double s = 0.0;
  for (uint32_t d = 0; d < dim; ++d) s += a[d] * b[d];
  return s;
}

void axpy(double alpha, const double* x, double* y, uint32_t dim) {
  for (uint32_t d = 0; d < dim; ++d) y[d] += alpha * x[d];
}

struct TrainState {
  const std::vector<std::vector<uint32_t>>* sequences;
  EmbeddingMatrix* emb;
  const CbowConfig* config;
  const NoiseSampler* noise;
  std::vector<double> keep_prob;  // empty when subsampling is off
  uint64_t total_positions = 0;
  std::atomic<uint64_t> processed{0};
};

void train_shard(TrainState& st, size_t worker, size_t stride, Rng rng) {
  const CbowConfig& cfg = *st.config;
  const uint32_t dim = cfg.dim;
  double* input = st.emb->input.data();
  double* output = st.emb->output.data();

  std::vector<double> hidden(dim), hidden_err(dim);
  std::vector<uint32_t> kept;

  for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t s = worker; s < st.sequences->size(); s += stride) {
      const std::vector<uint32_t>* seq = &(*st.sequences)[s];
      if (!st.keep_prob.empty()) {
        kept.clear();
        for (const uint32_t w : *seq)
          if (rng.real01() < st.keep_prob[w]) kept.push_back(w);
        seq = &kept;
      }
      const size_t len = seq->size();
      for (size_t t = 0; t < len; ++t) {
        const uint64_t done = st.processed.fetch_add(1, std::memory_order_relaxed);
        const double frac =
            static_cast<double>(done) / static_cast<double>(st.total_positions);
        const double lr = std::max(cfg.lr_min, cfg.lr_start + (cfg.lr_min - cfg.lr_start) * frac);

        const auto [begin, end] = context_range(t, len, cfg.window);
        const size_t context_size = (end - begin) - 1;  // minus the center
        if (context_size == 0) continue;

        std::fill(hidden.begin(), hidden.end(), 0.0);
        for (size_t c = begin; c < end; ++c) {
          if (c == t) continue;
          axpy(1.0, input + static_cast<size_t>((*seq)[c]) * dim, hidden.data(), dim);
        }
        const double inv = 1.0 / static_cast<double>(context_size);
        for (uint32_t d = 0; d < dim; ++d) hidden[d] *= inv;

        std::fill(hidden_err.begin(), hidden_err.end(), 0.0);
        const uint32_t center = (*seq)[t];

        // Positive update toward the center's output vector, then
        // `negatives` draws from the unigram^0.75 noise distribution.
        {
          double* out_row = output + static_cast<size_t>(center) * dim;
          const double g = (1.0 - sigmoid(dot(out_row, hidden.data(), dim))) * lr;
          axpy(g, out_row, hidden_err.data(), dim);
          axpy(g, hidden.data(), out_row, dim);
        }
        for (uint32_t k = 0; k < cfg.negatives; ++k) {
          const uint32_t negative = st.noise->sample(rng);
          if (negative == center) continue;
          double* out_row = output + static_cast<size_t>(negative) * dim;
          const double g = -sigmoid(dot(out_row, hidden.data(), dim)) * lr;
          axpy(g, out_row, hidden_err.data(), dim);
          axpy(g, hidden.data(), out_row, dim);
        }

        for (size_t c = begin; c < end; ++c) {
          if (c == t) continue;
          axpy(inv, hidden_err.data(), input + static_cast<size_t>((*seq)[c]) * dim, dim);
        }
      }
    }
  }
}

}  // namespace

void CbowConfig::validate() const {
  if (dim < 1) throw ConfigError("cbow: dim must be >= 1");
  if (window < 1) throw ConfigError("cbow: window must be >= 1");
  if (negatives < 1) throw ConfigError("cbow: negatives must be >= 1");
  if (!(lr_start > lr_min && lr_min > 0.0))
    throw ConfigError("cbow: need lr_start > lr_min > 0");
  if (workers < 1) throw ConfigError("cbow: workers must be >= 1");
}

NoiseSampler::NoiseSampler(std::span<const uint64_t> counts) {
  if (counts.empty()) throw DataError("noise sampler needs a non-empty vocabulary");
  cdf_.reserve(counts.size());
  double acc = 0.0;
  for (const uint64_t c : counts) {
    acc += std::pow(static_cast<double>(c), 0.75);
    cdf_.push_back(acc);
  }
  if (acc <= 0.0) throw DataError("noise sampler: all counts are zero");
  for (double& v : cdf_) v /= acc;
  cdf_.back() = 1.0;
}

uint32_t NoiseSampler::sample(Rng& rng) const {
  const double u = rng.real01();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<uint32_t>(std::min<size_t>(it - cdf_.begin(), cdf_.size() - 1));
}

double NoiseSampler::probability(uint32_t index) const {
  const double hi = cdf_.at(index);
  const double lo = index == 0 ? 0.0 : cdf_[index - 1];
  return hi - lo;
}

std::pair<size_t, size_t> context_range(size_t t, size_t len, uint32_t window) {
  const size_t begin = t >= window ? t - window : 0;
  const size_t end = std::min(len, t + window + 1);
  return {begin, end};
}

EmbeddingMatrix train_cbow(const std::vector<std::vector<uint32_t>>& sequences,
                           const Vocabulary& vocab, const CbowConfig& config) {
  config.validate();
  const uint32_t v = vocab.size();
  if (v == 0) throw DataError("cbow: empty vocabulary");

  uint64_t total_events = 0;
  bool any_trainable = false;
  for (const auto& seq : sequences) {
    for (const uint32_t w : seq)
      if (w >= v) throw DataError("cbow: sequence index out of vocabulary range");
    total_events += seq.size();
    if (seq.size() >= 2) any_trainable = true;
  }
  if (!any_trainable) throw DataError("cbow: need at least one sequence of length >= 2");

  EmbeddingMatrix emb;
  emb.dim = config.dim;
  emb.row_codes.reserve(v);
  for (uint32_t i = 0; i < v; ++i) emb.row_codes.push_back(vocab.code_at(i));
  emb.input.resize(static_cast<size_t>(v) * config.dim);
  emb.output.assign(static_cast<size_t>(v) * config.dim, 0.0);

  Rng init_rng(config.seed);
  const double scale = 1.0 / static_cast<double>(config.dim);
  for (double& w : emb.input) w = (init_rng.real01() - 0.5) * scale;

  if (config.epochs == 0 || total_events == 0) return emb;

  std::vector<uint64_t> counts(v);
  for (uint32_t i = 0; i < v; ++i) counts[i] = vocab.count_at(i);
  const NoiseSampler noise(counts);

  TrainState st;
  st.sequences = &sequences;
  st.emb = &emb;
  st.config = &config;
  st.noise = &noise;
  st.total_positions = total_events * config.epochs;
  if (config.subsample_threshold > 0.0) {
    uint64_t corpus_total = 0;
    for (const uint64_t c : counts) corpus_total += c;
    st.keep_prob.resize(v);
    for (uint32_t i = 0; i < v; ++i) {
      const double f = static_cast<double>(counts[i]) / static_cast<double>(corpus_total);
      const double ratio = f / config.subsample_threshold;
      st.keep_prob[i] = std::min(1.0, (std::sqrt(ratio) + 1.0) / ratio);
    }
  }

  if (config.workers == 1) {
    train_shard(st, 0, 1, Rng(derive_seed(config.seed, 1)));
  } else {
    std::vector<std::thread> threads;
    threads.reserve(config.workers);
    for (uint32_t w = 0; w < config.workers; ++w)
      threads.emplace_back([&st, w, &config] {
        train_shard(st, w, config.workers, Rng(derive_seed(config.seed, 1 + w)));
      });
    for (auto& th : threads) th.join();
  }
  return emb;
}

double cbow_negative_sampling_loss(const std::vector<std::vector<uint32_t>>& sequences,
                                   const EmbeddingMatrix& emb, const CbowConfig& config,
                                   uint64_t eval_seed) {
  const uint32_t dim = emb.dim;
  const uint32_t v = emb.size();
  std::vector<uint64_t> counts(v, 0);
  for (const auto& seq : sequences)
    for (const uint32_t w : seq) counts.at(w) += 1;
  const NoiseSampler noise(counts);

  Rng rng(eval_seed);
  std::vector<double> hidden(dim);
  double loss = 0.0;
  uint64_t positions = 0;
  for (const auto& seq : sequences) {
    const size_t len = seq.size();
    for (size_t t = 0; t < len; ++t) {
      const auto [begin, end] = context_range(t, len, config.window);
      const size_t context_size = (end - begin) - 1;
      if (context_size == 0) continue;
      std::fill(hidden.begin(), hidden.end(), 0.0);
      for (size_t c = begin; c < end; ++c) {
        if (c == t) continue;
        axpy(1.0, emb.input.data() + static_cast<size_t>(seq[c]) * dim, hidden.data(), dim);
      }
      const double inv = 1.0 / static_cast<double>(context_size);
      for (uint32_t d = 0; d < dim; ++d) hidden[d] *= inv;

      const double* center_row = emb.output.data() + static_cast<size_t>(seq[t]) * dim;
      loss -= std::log(std::max(1e-300, sigmoid(dot(center_row, hidden.data(), dim))));
      for (uint32_t k = 0; k < config.negatives; ++k) {
        const uint32_t negative = noise.sample(rng);
        if (negative == seq[t]) continue;
        const double* neg_row = emb.output.data() + static_cast<size_t>(negative) * dim;
        loss -= std::log(std::max(1e-300, sigmoid(-dot(neg_row, hidden.data(), dim))));
      }
      ++positions;
    }
  }
  return positions == 0 ? 0.0 : loss / static_cast<double>(positions);
}

std::vector<std::pair<uint32_t, double>> nearest_neighbors(const EmbeddingMatrix& emb,
                                                           uint32_t query_index, int k) {
  if (k < 0) throw ConfigError("nearest_neighbors: k must be >= 0");
  const uint32_t v = emb.size();
  if (query_index >= v) throw ConfigError("nearest_neighbors: query index out of range");
  if (static_cast<uint32_t>(k) >= v)
    throw ConfigError("nearest_neighbors: k must be smaller than the vocabulary");
  if (k == 0) return {};

  const uint32_t dim = emb.dim;
  const double* q = emb.input.data() + static_cast<size_t>(query_index) * dim;
  const double qn = std::sqrt(dot(q, q, dim));

  std::vector<std::pair<uint32_t, double>> scored;
  scored.reserve(v - 1);
  for (uint32_t i = 0; i < v; ++i) {
    if (i == query_index) continue;
    const double* r = emb.input.data() + static_cast<size_t>(i) * dim;
    const double rn = std::sqrt(dot(r, r, dim));
    const double denom = qn * rn;
    const double cos = denom > 0.0 ? dot(q, r, dim) / denom : 0.0;
    scored.emplace_back(i, cos);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  scored.resize(static_cast<size_t>(k));
  return scored;
}

void save_embeddings(const EmbeddingMatrix& emb, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << emb.size() << " " << emb.dim << "\n";
  char buf[32];
  for (uint32_t i = 0; i < emb.size(); ++i) {
    f << emb.row_codes[i].code << " " << to_string(emb.row_codes[i].kind);
    const auto row = emb.row(i);
    for (const double x : row) {
      std::snprintf(buf, sizeof(buf), " %.6f", x);
      f << buf;
    }
    f << "\n";
  }
  if (!f) throw ConfigError("write failed: " + path);
}

EmbeddingMatrix load_embeddings(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open embeddings file: " + path);
  std::string line;
  if (!std::getline(f, line)) throw DataError(path + ": missing header");
  uint32_t v = 0, dim = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> v >> dim) || dim == 0) throw DataError(path + ": malformed header");
  }

  EmbeddingMatrix emb;
  emb.dim = dim;
  emb.row_codes.reserve(v);
  emb.input.reserve(static_cast<size_t>(v) * dim);

  size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> tokens;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    // Trailing tokens are the kind plus dim values; anything before them
    // (possibly several tokens) is the code.
    if (tokens.size() < static_cast<size_t>(dim) + 2)
      throw DataError(path + ":" + std::to_string(line_no) + ": short embedding row");
    const size_t code_tokens = tokens.size() - dim - 1;
    EventCode code;
    code.code = tokens[0];
    for (size_t i = 1; i < code_tokens; ++i) code.code += " " + tokens[i];
    code.kind = parse_event_kind(tokens[code_tokens]);
    emb.row_codes.push_back(std::move(code));
    for (size_t i = code_tokens + 1; i < tokens.size(); ++i) {
      errno = 0;
      char* endp = nullptr;
      const double x = std::strtod(tokens[i].c_str(), &endp);
      if (errno != 0 || endp == tokens[i].c_str())
        throw DataError(path + ":" + std::to_string(line_no) + ": bad value");
      emb.input.push_back(x);
    }
  }
  if (emb.row_codes.size() != v)
    throw DataError(path + ": header declares " + std::to_string(v) + " rows, found " +
                    std::to_string(emb.row_codes.size()));
  emb.output.assign(emb.input.size(), 0.0);
  return emb;
}

}  // namespace ehr
