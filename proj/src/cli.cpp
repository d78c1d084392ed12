#include "ehr/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "ehr/baselines.hpp"
#include "ehr/cohort.hpp"
#include "ehr/data_model.hpp"
#include "ehr/embedding.hpp"
#include "ehr/errors.hpp"
#include "ehr/metrics.hpp"
#include "ehr/nn.hpp"
#include "ehr/representations.hpp"
#include "ehr/rng.hpp"
#include "ehr/synth.hpp"
#include "ehr/version.hpp"
#include "json.hpp"

namespace ehr {

namespace fs = std::filesystem;
using nlohmann::json;

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(uint64_t value) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ConfigError("config file is not a JSON object: " + path);
  return j;
}

// "--stage.key=value" overrides applied onto the config document. Values
// parse as JSON when possible and fall back to strings.
void apply_overrides(json& config, const std::vector<std::string>& extras) {
  for (const auto& raw : extras) {
    if (raw.rfind("--", 0) != 0)
      throw ConfigError("unrecognized argument: " + raw);
    const auto eq = raw.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must look like --stage.key=value: " + raw);
    const std::string path = raw.substr(2, eq - 2);
    const std::string value = raw.substr(eq + 1);
    if (path.empty() || value.empty())
      throw ConfigError("override must look like --stage.key=value: " + raw);

    json* node = &config;
    size_t start = 0;
    while (true) {
      const size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot - start);
      if (key.empty()) throw ConfigError("bad override path: " + raw);
      if (dot == std::string::npos) {
        json parsed = json::parse(value, nullptr, false);
        (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
        break;
      }
      node = &(*node)[key];
      if (!node->is_object()) *node = json::object();
      start = dot + 1;
    }
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field \"") + key + "\" has the wrong type");
  }
}

uint64_t stage_seed(const json& stage, uint64_t global_seed, uint64_t tag) {
  if (stage.is_object() && stage.contains("seed"))
    return stage.at("seed").get<uint64_t>();
  return derive_seed(global_seed, tag);
}

SynthConfig synth_config(const json& root, uint64_t global_seed) {
  const json stage = root.value("synth", json::object());
  SynthConfig c;
  c.vocab_size = get_or<uint32_t>(stage, "vocab_size", c.vocab_size);
  c.concept_count = get_or<uint32_t>(stage, "concept_count", c.concept_count);
  c.patients = get_or<uint32_t>(stage, "patients", c.patients);
  if (stage.contains("seq_len")) {
    const auto range = stage.at("seq_len").get<std::vector<uint32_t>>();
    if (range.size() != 2) throw ConfigError("synth.seq_len must be [min, max]");
    c.seq_len_min = range[0];
    c.seq_len_max = range[1];
  }
  if (stage.contains("motif")) {
    const json& m = stage.at("motif");
    c.motif.first = get_or<std::string>(m, "first", "");
    c.motif.second = get_or<std::string>(m, "second", "");
    c.motif.max_gap = get_or<int>(m, "max_gap", c.motif.max_gap);
  }
  c.target_code = get_or<std::string>(stage, "target_code", c.target_code);
  c.case_fraction = get_or<double>(stage, "case_fraction", c.case_fraction);
  if (stage.contains("day_step")) {
    const auto range = stage.at("day_step").get<std::vector<int>>();
    if (range.size() != 2) throw ConfigError("synth.day_step must be [min, max]");
    c.day_step_min = range[0];
    c.day_step_max = range[1];
  }
  c.seed = stage_seed(stage, global_seed, kSeedSynth);
  return c;
}

CbowConfig cbow_config(const json& root, uint64_t global_seed) {
  const json stage = root.value("cbow", json::object());
  CbowConfig c;
  c.dim = get_or<uint32_t>(stage, "dim", c.dim);
  c.window = get_or<uint32_t>(stage, "window", c.window);
  c.min_count = get_or<int>(stage, "min_count", c.min_count);
  c.negatives = get_or<uint32_t>(stage, "negatives", c.negatives);
  c.epochs = get_or<uint32_t>(stage, "epochs", c.epochs);
  c.lr_start = get_or<double>(stage, "lr_start", c.lr_start);
  c.lr_min = get_or<double>(stage, "lr_min", c.lr_min);
  c.subsample_threshold = get_or<double>(stage, "subsample", c.subsample_threshold);
  c.workers = get_or<uint32_t>(stage, "workers", c.workers);
  c.seed = stage_seed(stage, global_seed, kSeedEmbed);
  return c;
}

CohortSpec cohort_spec(const json& root, uint64_t global_seed) {
  const json stage = root.value("cohort", json::object());
  CohortSpec spec;
  if (stage.contains("targets")) {
    spec.target_codes.clear();
    for (const auto& t : stage.at("targets")) {
      EventCode code;
      code.code = t.at("code").get<std::string>();
      code.kind = parse_event_kind(t.value("kind", "diagnosis"));
      spec.target_codes.push_back(std::move(code));
    }
  }
  if (stage.contains("kinds")) {
    spec.allowed_kinds = {false, false};
    for (const auto& k : stage.at("kinds")) {
      const auto kind = parse_event_kind(k.get<std::string>());
      if (kind == EventKind::Diagnosis) spec.allowed_kinds.diagnosis = true;
      if (kind == EventKind::Medication) spec.allowed_kinds.medication = true;
    }
  }
  spec.min_len = get_or<uint32_t>(stage, "min_len", spec.min_len);
  spec.max_len = get_or<uint32_t>(stage, "max_len", spec.max_len);
  spec.controls_per_case = get_or<uint32_t>(stage, "controls_per_case",
                                            spec.controls_per_case);
  spec.holdoff_days = get_or<int64_t>(stage, "holdoff_days", spec.holdoff_days);
  if (stage.contains("split")) {
    const auto ratios = stage.at("split").get<std::vector<uint32_t>>();
    if (ratios.size() != 3) throw ConfigError("cohort.split must be [train, val, test]");
    spec.split_ratios = {ratios[0], ratios[1], ratios[2]};
  }
  spec.match_age_tolerance_years =
      get_or<int>(stage, "age_tolerance", spec.match_age_tolerance_years);
  spec.seed = stage_seed(stage, global_seed, kSeedCohort);
  return spec;
}

CnnConfig cnn_config(const json& root, uint64_t global_seed) {
  const json stage = root.value("model", json::object());
  CnnConfig c;
  c.input_mode = parse_input_mode(get_or<std::string>(stage, "input_mode", "rand"));
  c.dim = get_or<uint32_t>(stage, "dim", c.dim);
  if (stage.contains("banks")) {
    c.banks.clear();
    for (const auto& b : stage.at("banks")) {
      const auto pair = b.get<std::vector<uint32_t>>();
      if (pair.size() != 2) throw ConfigError("model.banks entries must be [F, K]");
      c.banks.emplace_back(pair[0], pair[1]);
    }
  }
  c.seed = stage_seed(stage, global_seed, kSeedTrain);
  return c;
}

TrainConfig train_config(const json& root, uint64_t global_seed) {
  const json stage = root.value("train", json::object());
  TrainConfig c;
  c.batch_size = get_or<uint32_t>(stage, "batch_size", c.batch_size);
  c.max_epochs = get_or<uint32_t>(stage, "max_epochs", c.max_epochs);
  c.patience = get_or<uint32_t>(stage, "patience", c.patience);
  c.seed = stage_seed(stage, global_seed, kSeedTrain);
  return c;
}

BaselineSuiteConfig suite_config(const json& root, uint64_t global_seed) {
  const json stage = root.value("suite", json::object());
  BaselineSuiteConfig c;
  if (stage.contains("classifiers")) {
    c.classifiers.clear();
    for (const auto& s : stage.at("classifiers"))
      c.classifiers.push_back(parse_classifier(s.get<std::string>()));
  }
  if (stage.contains("representations")) {
    c.representations.clear();
    for (const auto& s : stage.at("representations"))
      c.representations.push_back(parse_aggregation_mode(s.get<std::string>()));
  }
  if (stage.contains("lambda_grid"))
    c.lambda_grid = stage.at("lambda_grid").get<std::vector<double>>();
  c.seed = stage_seed(stage, global_seed, kSeedEval);
  return c;
}

std::string config_fingerprint(const json& config, uint64_t global_seed) {
  return hex64(fnv1a64(config.dump() + "#" + std::to_string(global_seed)));
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out))
    throw ConfigError("output directory is not writable: " + out);
}

Vocabulary vocabulary_for(const std::string& vocab_path,
                          const std::vector<RawPatient>& records, int min_count) {
  if (!vocab_path.empty()) return Vocabulary::load(vocab_path);
  return Vocabulary::build(records, min_count);
}

json counts_json(const CohortDataset& dataset) {
  return json{
      {"train",
       {{"cases", dataset.train_counts.cases}, {"controls", dataset.train_counts.controls}}},
      {"val", {{"cases", dataset.val_counts.cases}, {"controls", dataset.val_counts.controls}}},
      {"test",
       {{"cases", dataset.test_counts.cases}, {"controls", dataset.test_counts.controls}}}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << text;
  if (!f) throw ConfigError("write failed: " + path);
}

std::string metrics_csv_row(const MetricSet& m) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f", m.accuracy, m.auroc, m.auprc,
                m.max_f1);
  return buf;
}

json metrics_json(const MetricSet& m) {
  return json{{"accuracy", m.accuracy},
              {"auroc", m.auroc},
              {"auprc", m.auprc},
              {"max_f1", m.max_f1}};
}

int cmd_synth(const json& config, uint64_t global_seed, const std::string& out) {
  ensure_out_dir(out);
  const SynthConfig c = synth_config(config, global_seed);
  const std::string kind =
      get_or<std::string>(config.value("synth", json::object()), "kind", "corpus");
  std::vector<RawPatient> records;
  if (kind == "corpus")
    records = generate_corpus(c);
  else if (kind == "cohort")
    records = generate_cohort_corpus(c);
  else
    throw ConfigError("synth.kind must be \"corpus\" or \"cohort\"");

  save_patients(records, out + "/patients.jsonl", out + "/events.jsonl");
  size_t events = 0;
  for (const auto& r : records) events += r.events.size();
  std::cout << "synth: wrote " << records.size() << " patients, " << events
            << " events to " << out << "\n";
  return 0;
}

int cmd_embed(const json& config, uint64_t global_seed, const std::string& patients,
              const std::string& events, const std::string& out,
              const std::string& vocab_out) {
  const CbowConfig c = cbow_config(config, global_seed);
  const auto records = load_patients(patients, events);
  const Vocabulary vocab = Vocabulary::build(records, c.min_count);
  const auto indexed = index_records(records, vocab);
  const auto sequences = index_sequences(indexed);
  const EmbeddingMatrix emb = train_cbow(sequences, vocab, c);
  save_embeddings(emb, out);
  if (!vocab_out.empty()) vocab.save(vocab_out);
  std::cout << "embed: " << emb.size() << " vectors of dimension " << emb.dim
            << " -> " << out << "\n";
  return 0;
}

int cmd_neighbors(const std::string& emb_path, const std::string& code,
                  const std::string& kind, int k) {
  const EmbeddingMatrix emb = load_embeddings(emb_path);
  const EventCode query{code, parse_event_kind(kind)};
  std::optional<uint32_t> query_index;
  for (uint32_t i = 0; i < emb.size(); ++i)
    if (emb.row_codes[i] == query) {
      query_index = i;
      break;
    }
  if (!query_index)
    throw DataError("code not present in the embedding file: " + code + " (" + kind + ")");
  const auto neighbors = nearest_neighbors(emb, *query_index, k);
  char buf[32];
  for (const auto& [index, cosine] : neighbors) {
    std::snprintf(buf, sizeof(buf), " %.6f", cosine);
    std::cout << emb.row_codes[index].code << buf << "\n";
  }
  return 0;
}

int cmd_cohort(const json& config, uint64_t global_seed, const std::string& patients,
               const std::string& events, const std::string& vocab_path,
               const std::string& out) {
  ensure_out_dir(out);
  const CbowConfig cbow = cbow_config(config, global_seed);
  const CohortSpec spec = cohort_spec(config, global_seed);
  const auto records = load_patients(patients, events);
  const Vocabulary vocab = vocabulary_for(vocab_path, records, cbow.min_count);
  const auto indexed = index_records(records, vocab);
  const CohortDataset dataset = build_cohort(indexed, vocab, spec);
  save_cohort(dataset, spec, vocab.size(), out + "/cohort.jsonl",
              out + "/cohort_summary.json");
  std::cout << "cohort: " << dataset.case_count() << " cases, "
            << dataset.control_count() << " controls -> " << out << "\n";
  return 0;
}

uint32_t summary_vocab_size(const std::string& summary_path) {
  if (summary_path.empty()) return 0;
  std::ifstream f(summary_path);
  if (!f) throw ConfigError("cannot open summary file: " + summary_path);
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded()) throw DataError("malformed summary file: " + summary_path);
  return j.value("vocab_size", 0u);
}

int cmd_train(const json& config, uint64_t global_seed, const std::string& cohort_path,
              const std::string& summary_path, const std::string& emb_path,
              const std::string& out) {
  ensure_out_dir(out);
  const CnnConfig model_cfg = cnn_config(config, global_seed);
  const TrainConfig train_cfg = train_config(config, global_seed);
  if (input_mode_needs_pretrained(model_cfg.input_mode) && emb_path.empty())
    throw ConfigError(std::string("input mode ") + to_string(model_cfg.input_mode) +
                      " requires --emb");

  const CohortDataset dataset = load_cohort(cohort_path);
  std::optional<EmbeddingMatrix> emb;
  if (!emb_path.empty()) emb = load_embeddings(emb_path);
  const uint32_t vocab_size = summary_vocab_size(summary_path);

  const TrainResult result = train_cnn(dataset, vocab_size, model_cfg, train_cfg,
                                       emb ? &*emb : nullptr);
  save_checkpoint(result.model, out + "/model.bin");

  json history = json::array();
  for (const auto& e : result.history)
    history.push_back({{"train_loss", e.train_loss}, {"val_auroc", e.val_auroc}});
  const json report{{"toolkit_version", kVersion},
                    {"config_fingerprint", config_fingerprint(config, global_seed)},
                    {"input_mode", to_string(model_cfg.input_mode)},
                    {"best_epoch", result.best_epoch},
                    {"epochs_run", result.history.size()},
                    {"history", history}};
  write_text(out + "/history.json", report.dump(2) + "\n");
  std::cout << "train: best epoch " << result.best_epoch << " of "
            << result.history.size() << " -> " << out << "/model.bin\n";
  return 0;
}

int cmd_evaluate(const json& config, uint64_t global_seed,
                 const std::string& model_path, const std::string& cohort_path,
                 const std::string& summary_path, const std::string& split,
                 const std::string& out) {
  ensure_out_dir(out);
  const CnnModel model = load_checkpoint(model_path);
  const CohortDataset dataset = load_cohort(cohort_path);

  const std::vector<LabeledSequence>* sequences = nullptr;
  if (split == "train")
    sequences = &dataset.train;
  else if (split == "val")
    sequences = &dataset.val;
  else if (split == "test")
    sequences = &dataset.test;
  else
    throw ConfigError("--split must be train, val or test");
  if (sequences->empty()) throw DataError("evaluate: split \"" + split + "\" is empty");

  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(sequences->size());
  for (const auto& s : *sequences) {
    scores.push_back(predict_case_probability(model, s.indices));
    labels.push_back(s.label);
  }
  const MetricSet metrics = compute_metrics(scores, labels);

  int64_t holdoff_days = 0;
  if (!summary_path.empty()) {
    std::ifstream sf(summary_path);
    if (!sf) throw ConfigError("cannot open summary file: " + summary_path);
    const json summary = json::parse(sf, nullptr, false);
    if (!summary.is_discarded() && summary.contains("spec"))
      holdoff_days = summary["spec"].value("holdoff_days", int64_t{0});
  }
  const json report{{"task", get_or<std::string>(config, "task", "synthetic-risk")},
                    {"toolkit_version", kVersion},
                    {"config_fingerprint", config_fingerprint(config, global_seed)},
                    {"split", split},
                    {"holdoff_days", holdoff_days},
                    {"counts", counts_json(dataset)},
                    {"models",
                     json::array({{{"model", "cnn"},
                                   {"input", to_string(model.input_mode)},
                                   {"metrics", metrics_json(metrics)}}})}};
  write_text(out + "/eval_report.json", report.dump(2) + "\n");
  // Early-prediction table layout: hold-off, case count, then the metrics.
  write_text(out + "/eval_report.csv",
             "holdoff_days,cases,model,split,accuracy,auroc,auprc,max_f1\n" +
                 std::to_string(holdoff_days) + "," +
                 std::to_string(dataset.case_count()) + ",cnn," + split + "," +
                 metrics_csv_row(metrics) + "\n");
  std::cout << "evaluate: " << split << " auroc " << metrics.auroc << " -> " << out
            << "/eval_report.json\n";
  return 0;
}

int cmd_suite(const json& config, uint64_t global_seed, const std::string& cohort_path,
              const std::string& emb_path, const std::string& out) {
  ensure_out_dir(out);
  const BaselineSuiteConfig suite_cfg = suite_config(config, global_seed);
  const CohortDataset dataset = load_cohort(cohort_path);

  std::optional<EmbeddingMatrix> emb;
  if (!emb_path.empty()) emb = load_embeddings(emb_path);

  uint32_t vocab_size = 0;
  if (emb) vocab_size = emb->size();
  for (const auto* split : {&dataset.train, &dataset.val, &dataset.test})
    for (const auto& s : *split)
      for (const uint32_t idx : s.indices) vocab_size = std::max(vocab_size, idx + 1);

  const auto cells =
      run_baseline_suite(dataset, emb ? &*emb : nullptr, vocab_size, suite_cfg);

  json rows = json::array();
  std::string csv = "classifier,representation,accuracy,auroc,auprc,max_f1\n";
  for (const auto& cell : cells) {
    json row{{"classifier", to_string(cell.classifier)},
             {"representation", to_string(cell.representation)},
             {"metrics", metrics_json(cell.metrics)}};
    if (cell.chosen_lambda) row["lambda"] = *cell.chosen_lambda;
    rows.push_back(std::move(row));
    csv += std::string(to_string(cell.classifier)) + "," +
           to_string(cell.representation) + "," + metrics_csv_row(cell.metrics) + "\n";
  }
  const json report{{"task", get_or<std::string>(config, "task", "synthetic-risk")},
                    {"toolkit_version", kVersion},
                    {"config_fingerprint", config_fingerprint(config, global_seed)},
                    {"counts", counts_json(dataset)},
                    {"cells", rows}};
  write_text(out + "/suite_report.json", report.dump(2) + "\n");
  write_text(out + "/suite_report.csv", csv);
  std::cout << "suite: " << cells.size() << " cells -> " << out << "/suite_report.json\n";
  return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  CLI::App app{"medical event embedding and temporal CNN risk prediction"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t global_seed = 42;
  app.add_option("--config", config_path, "JSON configuration file")->capture_default_str();
  app.add_option("--seed", global_seed, "global seed")->capture_default_str();

  struct {
    std::string out = "out";
    std::string patients, events, vocab, vocab_out;
    std::string emb, cohort, summary, model;
    std::string code, kind = "diagnosis", split = "test";
    int k = 10;
  } opt;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", opt.out, "output directory")->required();
  synth->allow_extras();

  CLI::App* embed = app.add_subcommand("embed", "train CBOW embeddings");
  embed->add_option("--patients", opt.patients)->required();
  embed->add_option("--events", opt.events)->required();
  embed->add_option("--out", opt.emb, "embedding output file")->required();
  embed->add_option("--vocab-out", opt.vocab_out, "also write the vocabulary");
  embed->allow_extras();

  CLI::App* neighbors = app.add_subcommand("neighbors", "nearest embedding neighbors");
  neighbors->add_option("--emb", opt.emb)->required();
  neighbors->add_option("--code", opt.code)->required();
  neighbors->add_option("--kind", opt.kind, "diagnosis or medication");
  neighbors->add_option("--k", opt.k, "neighbor count");
  neighbors->allow_extras();

  CLI::App* cohort = app.add_subcommand("cohort", "build a case/control cohort");
  cohort->add_option("--patients", opt.patients)->required();
  cohort->add_option("--events", opt.events)->required();
  cohort->add_option("--vocab", opt.vocab, "vocabulary file (else rebuilt)");
  cohort->add_option("--out", opt.out)->required();
  cohort->allow_extras();

  CLI::App* train = app.add_subcommand("train", "train the CNN risk model");
  train->add_option("--cohort", opt.cohort)->required();
  train->add_option("--summary", opt.summary, "cohort summary sidecar");
  train->add_option("--emb", opt.emb, "pretrained embeddings");
  train->add_option("--out", opt.out)->required();
  train->allow_extras();

  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint");
  evaluate->add_option("--model", opt.model)->required();
  evaluate->add_option("--cohort", opt.cohort)->required();
  evaluate->add_option("--summary", opt.summary);
  evaluate->add_option("--split", opt.split, "train, val or test");
  evaluate->add_option("--out", opt.out)->required();
  evaluate->allow_extras();

  CLI::App* suite = app.add_subcommand("suite", "run the baseline suite");
  suite->add_option("--cohort", opt.cohort)->required();
  suite->add_option("--emb", opt.emb, "embeddings for W2v representations");
  suite->add_option("--out", opt.out)->required();
  suite->allow_extras();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    json config = load_config_file(config_path);
    if (config.contains("seed") && !app.count("--seed"))
      global_seed = config.at("seed").get<uint64_t>();
    config["seed"] = global_seed;

    CLI::App* active = app.get_subcommands().front();
    apply_overrides(config, active->remaining());

    if (active == synth) return cmd_synth(config, global_seed, opt.out);
    if (active == embed)
      return cmd_embed(config, global_seed, opt.patients, opt.events, opt.emb,
                       opt.vocab_out);
    if (active == neighbors) return cmd_neighbors(opt.emb, opt.code, opt.kind, opt.k);
    if (active == cohort)
      return cmd_cohort(config, global_seed, opt.patients, opt.events, opt.vocab,
                        opt.out);
    if (active == train)
      return cmd_train(config, global_seed, opt.cohort, opt.summary, opt.emb, opt.out);
    if (active == evaluate)
      return cmd_evaluate(config, global_seed, opt.model, opt.cohort, opt.summary,
                          opt.split, opt.out);
    if (active == suite)
      return cmd_suite(config, global_seed, opt.cohort, opt.emb, opt.out);
    throw ConfigError("no subcommand");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ehr
