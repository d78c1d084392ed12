#include "ehr/cohort.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <optional>
#include <unordered_set>

#include "ehr/errors.hpp"
#include "ehr/rng.hpp"
#include "json.hpp"

namespace ehr {

using nlohmann::json;

void CohortSpec::validate() const {
  if (target_codes.empty()) throw ConfigError("cohort: target_codes must be non-empty");
  if (allowed_kinds.empty()) throw ConfigError("cohort: allowed_kinds must be non-empty");
  if (min_len < 1 || min_len > max_len) throw ConfigError("cohort: need 1 <= min_len <= max_len");
  if (controls_per_case < 1) throw ConfigError("cohort: controls_per_case must be >= 1");
  if (holdoff_days < 0) throw ConfigError("cohort: holdoff_days must be >= 0");
  for (const uint32_t r : split_ratios)
    if (r == 0) throw ConfigError("cohort: split ratios must be positive");
  if (match_age_tolerance_years < 0)
    throw ConfigError("cohort: age tolerance must be >= 0");
}

void CohortDataset::recount() {
  const auto count = [](const std::vector<LabeledSequence>& split) {
    SplitCounts c;
    for (const auto& s : split) (s.label == 1 ? c.cases : c.controls) += 1;
    return c;
  };
  train_counts = count(train);
  val_counts = count(val);
  test_counts = count(test);
}

std::vector<std::string> match_controls(const MatchCandidate& case_info,
                                        const std::vector<MatchCandidate>& pool,
                                        const CohortSpec& spec) {
  const size_t needed = spec.controls_per_case;

  int max_span = 0;
  for (const auto& c : pool)
    max_span = std::max(max_span, std::abs(c.birth_year - case_info.birth_year));

  const auto collect = [&](bool require_sex, int tolerance) {
    std::vector<const MatchCandidate*> out;
    for (const auto& c : pool) {
      if (require_sex && c.sex != case_info.sex) continue;
      if (std::abs(c.birth_year - case_info.birth_year) > tolerance) continue;
      out.push_back(&c);
    }
    return out;
  };

  std::vector<const MatchCandidate*> candidates;
  for (const bool require_sex : {true, false}) {
    for (int tol = spec.match_age_tolerance_years;; tol += 5) {
      candidates = collect(require_sex, tol);
      if (candidates.size() >= needed) break;
      if (tol > max_span) break;  // fully relaxed at this stage
    }
    if (candidates.size() >= needed) break;
  }
  if (candidates.size() < needed)
    throw DataError("insufficient eligible controls for case " + case_info.patient_id +
                    ": needed " + std::to_string(needed) + ", found " +
                    std::to_string(candidates.size()) + " after full relaxation");

  std::sort(candidates.begin(), candidates.end(),
            [&](const MatchCandidate* a, const MatchCandidate* b) {
              const int64_t da = std::abs(static_cast<int64_t>(a->length) -
                                          static_cast<int64_t>(case_info.length));
              const int64_t db = std::abs(static_cast<int64_t>(b->length) -
                                          static_cast<int64_t>(case_info.length));
              if (da != db) return da < db;
              return a->patient_id < b->patient_id;
            });
  std::vector<std::string> ids;
  ids.reserve(needed);
  for (size_t i = 0; i < needed; ++i) ids.push_back(candidates[i]->patient_id);
  return ids;
}

SplitSizes split_sizes(size_t n, const std::array<uint32_t, 3>& ratios) {
  for (const uint32_t r : ratios)
    if (r == 0) throw ConfigError("split ratios must be positive");
  if (n < 10) throw DataError("cannot honor all three splits with fewer than 10 units");
  const uint64_t sum = ratios[0] + ratios[1] + ratios[2];
  SplitSizes s;
  s.train = static_cast<size_t>(n * ratios[0] / sum);
  s.val = static_cast<size_t>(n * ratios[1] / sum);
  s.test = static_cast<size_t>(n * ratios[2] / sum);
  s.train += n - (s.train + s.val + s.test);  // remainder to train
  return s;
}

std::array<std::vector<LabeledSequence>, 3> split_dataset(
    std::vector<LabeledSequence> sequences, const std::array<uint32_t, 3>& ratios,
    uint64_t seed) {
  const SplitSizes sizes = split_sizes(sequences.size(), ratios);
  Rng rng(seed);
  rng.shuffle(sequences);
  std::array<std::vector<LabeledSequence>, 3> out;
  size_t i = 0;
  for (size_t k = 0; k < sizes.train; ++k) out[0].push_back(std::move(sequences[i++]));
  for (size_t k = 0; k < sizes.val; ++k) out[1].push_back(std::move(sequences[i++]));
  for (size_t k = 0; k < sizes.test; ++k) out[2].push_back(std::move(sequences[i++]));
  return out;
}

namespace {

LabeledSequence make_sequence(const PatientRecord& filtered, size_t take, int label) {
  LabeledSequence seq;
  seq.patient_id = filtered.patient_id;
  seq.label = label;
  seq.indices.reserve(take);
  seq.days.reserve(take);
  for (size_t i = 0; i < take; ++i) {
    seq.indices.push_back(filtered.events[i].code_index);
    seq.days.push_back(filtered.events[i].day);
  }
  return seq;
}

}  // namespace

CohortDataset build_cohort(const std::vector<PatientRecord>& records,
                           const Vocabulary& vocab, const CohortSpec& spec) {
  spec.validate();
  if (records.empty()) throw DataError("cohort: no patient records");

  std::unordered_set<uint32_t> target_indices;
  for (const auto& code : spec.target_codes) {
    const auto idx = vocab.index_of(code);
    if (idx) target_indices.insert(*idx);
  }

  struct Group {
    LabeledSequence case_seq;
    std::vector<LabeledSequence> control_seqs;
  };

  std::vector<Group> groups;
  std::vector<MatchCandidate> case_infos;
  std::vector<LabeledSequence> case_seqs;
  std::vector<MatchCandidate> pool;
  std::unordered_map<std::string, LabeledSequence> pool_seqs;

  for (const auto& record : records) {
    bool has_target_anywhere = false;
    for (const auto& ev : record.events)
      if (target_indices.count(ev.code_index)) {
        has_target_anywhere = true;
        break;
      }

    const PatientRecord filtered = filter_kinds(record, spec.allowed_kinds, vocab);

    std::optional<int64_t> first_target_day;
    for (const auto& ev : filtered.events)
      if (target_indices.count(ev.code_index)) {
        first_target_day = ev.day;
        break;
      }

    if (first_target_day) {
      // Case path: keep history strictly before the hold-off boundary.
      const int64_t cutoff = *first_target_day - spec.holdoff_days;
      size_t keep = 0;
      while (keep < filtered.events.size() && filtered.events[keep].day < cutoff) ++keep;
      if (keep < spec.min_len) continue;  // not enough history
      const size_t take = std::min<size_t>(keep, spec.max_len);
      case_seqs.push_back(make_sequence(filtered, take, 1));
      case_infos.push_back({record.patient_id, record.sex, record.birth_year,
                            static_cast<uint32_t>(take)});
    } else if (!has_target_anywhere) {
      if (filtered.events.size() < spec.min_len) continue;
      const size_t take = std::min<size_t>(filtered.events.size(), spec.max_len);
      pool.push_back({record.patient_id, record.sex, record.birth_year,
                      static_cast<uint32_t>(take)});
      pool_seqs.emplace(record.patient_id, make_sequence(filtered, take, 0));
    }
    // Patients with the target only outside the allowed kinds are neither
    // cases nor eligible controls.
  }

  if (case_seqs.empty()) throw DataError("cohort: empty case group");

  // Deterministic matching order.
  std::vector<size_t> case_order(case_seqs.size());
  std::iota(case_order.begin(), case_order.end(), size_t{0});
  std::sort(case_order.begin(), case_order.end(), [&](size_t a, size_t b) {
    return case_infos[a].patient_id < case_infos[b].patient_id;
  });

  for (const size_t ci : case_order) {
    const auto chosen = match_controls(case_infos[ci], pool, spec);
    Group group;
    group.case_seq = std::move(case_seqs[ci]);
    for (const auto& id : chosen) {
      group.control_seqs.push_back(std::move(pool_seqs.at(id)));
      pool_seqs.erase(id);
      pool.erase(std::find_if(pool.begin(), pool.end(),
                              [&](const MatchCandidate& c) { return c.patient_id == id; }));
    }
    groups.push_back(std::move(group));
  }

  // Split whole case groups so matched pairs never straddle splits.
  const SplitSizes sizes = split_sizes(groups.size(), spec.split_ratios);
  Rng rng(spec.seed);
  rng.shuffle(groups);

  CohortDataset dataset;
  const auto emit = [](std::vector<LabeledSequence>& split, Group& group) {
    split.push_back(std::move(group.case_seq));
    for (auto& c : group.control_seqs) split.push_back(std::move(c));
  };
  size_t g = 0;
  for (size_t k = 0; k < sizes.train; ++k) emit(dataset.train, groups[g++]);
  for (size_t k = 0; k < sizes.val; ++k) emit(dataset.val, groups[g++]);
  for (size_t k = 0; k < sizes.test; ++k) emit(dataset.test, groups[g++]);
  dataset.recount();
  return dataset;
}

CohortDataset rebalance_controls(CohortDataset dataset, const CohortSpec& spec,
                                 uint64_t seed) {
  dataset.recount();
  const uint64_t cases = dataset.case_count();
  const uint64_t controls = dataset.control_count();
  const uint64_t wanted = cases * spec.controls_per_case;
  if (controls < wanted)
    throw DataError("rebalance: control group already below the " +
                    std::to_string(spec.controls_per_case) + ":1 ratio");
  if (controls == wanted) return dataset;

  struct Ref {
    int split;
    size_t index;
  };
  std::vector<Ref> control_refs;
  std::vector<LabeledSequence>* splits[3] = {&dataset.train, &dataset.val, &dataset.test};
  for (int s = 0; s < 3; ++s)
    for (size_t i = 0; i < splits[s]->size(); ++i)
      if ((*splits[s])[i].label == 0) control_refs.push_back({s, i});

  Rng rng(seed);
  rng.shuffle(control_refs);
  control_refs.resize(static_cast<size_t>(controls - wanted));

  std::array<std::unordered_set<size_t>, 3> drop;
  for (const auto& ref : control_refs) drop[ref.split].insert(ref.index);
  for (int s = 0; s < 3; ++s) {
    std::vector<LabeledSequence> kept;
    kept.reserve(splits[s]->size());
    for (size_t i = 0; i < splits[s]->size(); ++i)
      if (!drop[s].count(i)) kept.push_back(std::move((*splits[s])[i]));
    *splits[s] = std::move(kept);
  }
  dataset.recount();
  return dataset;
}

void save_cohort(const CohortDataset& dataset, const CohortSpec& spec,
                 uint32_t vocab_size, const std::string& cohort_path,
                 const std::string& summary_path) {
  std::ofstream f(cohort_path);
  if (!f) throw ConfigError("cannot open for writing: " + cohort_path);
  const auto write_split = [&](const std::vector<LabeledSequence>& split,
                               const char* name) {
    for (const auto& s : split) {
      json j{{"patient_id", s.patient_id},
             {"label", s.label},
             {"indices", s.indices},
             {"days", s.days},
             {"split", name}};
      f << j.dump() << "\n";
    }
  };
  write_split(dataset.train, "train");
  write_split(dataset.val, "val");
  write_split(dataset.test, "test");
  if (!f) throw ConfigError("write failed: " + cohort_path);

  json targets = json::array();
  for (const auto& t : spec.target_codes)
    targets.push_back({{"code", t.code}, {"kind", to_string(t.kind)}});
  json kinds = json::array();
  if (spec.allowed_kinds.diagnosis) kinds.push_back("diagnosis");
  if (spec.allowed_kinds.medication) kinds.push_back("medication");
  const json summary{
      {"vocab_size", vocab_size},
      {"spec",
       {{"targets", targets},
        {"kinds", kinds},
        {"min_len", spec.min_len},
        {"max_len", spec.max_len},
        {"controls_per_case", spec.controls_per_case},
        {"holdoff_days", spec.holdoff_days},
        {"split", {spec.split_ratios[0], spec.split_ratios[1], spec.split_ratios[2]}},
        {"age_tolerance", spec.match_age_tolerance_years},
        {"seed", spec.seed}}},
      {"counts",
       {{"train", {{"cases", dataset.train_counts.cases}, {"controls", dataset.train_counts.controls}}},
        {"val", {{"cases", dataset.val_counts.cases}, {"controls", dataset.val_counts.controls}}},
        {"test", {{"cases", dataset.test_counts.cases}, {"controls", dataset.test_counts.controls}}}}}};
  std::ofstream sf(summary_path);
  if (!sf) throw ConfigError("cannot open for writing: " + summary_path);
  sf << summary.dump(2) << "\n";
  if (!sf) throw ConfigError("write failed: " + summary_path);
}

CohortDataset load_cohort(const std::string& cohort_path) {
  std::ifstream f(cohort_path);
  if (!f) throw ConfigError("cannot open cohort file: " + cohort_path);
  CohortDataset dataset;
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw DataError(cohort_path + ":" + std::to_string(line_no) + ": invalid JSON");
    LabeledSequence s;
    try {
      s.patient_id = j.at("patient_id").get<std::string>();
      s.label = j.at("label").get<int>();
      s.indices = j.at("indices").get<std::vector<uint32_t>>();
      s.days = j.at("days").get<std::vector<int64_t>>();
      const auto split = j.at("split").get<std::string>();
      if (s.label != 0 && s.label != 1) throw DataError("label must be 0 or 1");
      if (s.indices.size() != s.days.size())
        throw DataError("indices and days lengths differ");
      if (split == "train")
        dataset.train.push_back(std::move(s));
      else if (split == "val")
        dataset.val.push_back(std::move(s));
      else if (split == "test")
        dataset.test.push_back(std::move(s));
      else
        throw DataError("unknown split \"" + split + "\"");
    } catch (const json::exception& e) {
      throw DataError(cohort_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  dataset.recount();
  return dataset;
}

}  // namespace ehr
