#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ehr/data_model.hpp"

namespace ehr {

struct CohortSpec {
  std::vector<EventCode> target_codes;  // non-empty; defines the target diagnosis
  KindSet allowed_kinds;
  uint32_t min_len = 50;
  uint32_t max_len = 250;
  uint32_t controls_per_case = 2;
  int64_t holdoff_days = 0;
  std::array<uint32_t, 3> split_ratios = {7, 1, 2};  // train : val : test
  int match_age_tolerance_years = 5;
  uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

struct LabeledSequence {
  std::string patient_id;
  int label = 0;  // 1 = case
  std::vector<uint32_t> indices;
  std::vector<int64_t> days;
};

struct SplitCounts {
  uint32_t cases = 0;
  uint32_t controls = 0;
};

struct CohortDataset {
  std::vector<LabeledSequence> train, val, test;
  SplitCounts train_counts, val_counts, test_counts;

  uint32_t case_count() const {
    return train_counts.cases + val_counts.cases + test_counts.cases;
  }
  uint32_t control_count() const {
    return train_counts.controls + val_counts.controls + test_counts.controls;
  }
  void recount();
};

// Candidate descriptor used for demographic matching. length is the event
// count the sequence will have when emitted (post filter and truncation).
struct MatchCandidate {
  std::string patient_id;
  Sex sex = Sex::F;
  int birth_year = 0;
  uint32_t length = 0;
};

// Greedy demographic matching: candidates must share sex and be within the
// age tolerance; among them the controls_per_case with the closest record
// length win, ties to the lower patient_id. When a stage yields too few
// candidates the age tolerance grows in +5-year steps, then the sex
// constraint is dropped, before a DataError names the shortfall.
std::vector<std::string> match_controls(const MatchCandidate& case_info,
                                        const std::vector<MatchCandidate>& pool,
                                        const CohortSpec& spec);

// Full pipeline: kind filter, first-target hold-off cut, min/max length
// rules, control matching without replacement, and a case-group-preserving
// 7:1:2 split.
CohortDataset build_cohort(const std::vector<PatientRecord>& records,
                           const Vocabulary& vocab, const CohortSpec& spec);

// Deterministic shuffle then partition: sizes floor(n*r/sum) with the
// remainder assigned to train. n < 10 is an error.
struct SplitSizes {
  size_t train = 0, val = 0, test = 0;
};
SplitSizes split_sizes(size_t n, const std::array<uint32_t, 3>& ratios);

std::array<std::vector<LabeledSequence>, 3> split_dataset(
    std::vector<LabeledSequence> sequences, const std::array<uint32_t, 3>& ratios,
    uint64_t seed);

// Uniformly drops surplus controls (seeded) until control_count equals
// controls_per_case * case_count exactly.
CohortDataset rebalance_controls(CohortDataset dataset, const CohortSpec& spec,
                                 uint64_t seed);

// JSON-lines cohort file plus a JSON summary sidecar with per-split counts
// and the full spec.
void save_cohort(const CohortDataset& dataset, const CohortSpec& spec,
                 uint32_t vocab_size, const std::string& cohort_path,
                 const std::string& summary_path);
CohortDataset load_cohort(const std::string& cohort_path);

}  // namespace ehr
