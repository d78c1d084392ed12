#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ehr/data_model.hpp"

namespace ehr {

// Ordered event pair that must occur within max_gap positions (B at most
// max_gap events after A) somewhere in every case stream.
struct MotifSpec {
  std::string first;
  std::string second;
  int max_gap = 2;
};

struct SynthConfig {
  uint32_t vocab_size = 200;
  uint32_t concept_count = 10;  // must divide vocab_size
  uint32_t patients = 1000;
  uint32_t seq_len_min = 60;
  uint32_t seq_len_max = 160;
  MotifSpec motif;
  std::string target_code = "tgt";  // emitted as the first target diagnosis
  double case_fraction = 0.3;       // in (0,1)
  int day_step_min = 0;
  int day_step_max = 7;
  uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

// Synthetic code id <-> code string. Block codes are "e%04u"; kind
// alternates with parity so both kinds occur in generated data.
std::string synth_code_string(uint32_t id);
EventKind synth_code_kind(uint32_t id);
// Parses "e%04u" back to the id; returns false for motif/target codes.
bool parse_synth_code(const std::string& code, uint32_t* id);

// Concept-local streams: a latent concept is sampled per segment and the
// segment's events come from that concept's contiguous code block, so
// within-concept codes co-occur far more often than cross-concept codes.
std::vector<RawPatient> generate_corpus(const SynthConfig& config);

// Labeled variant. Cases carry the motif followed >= 1 day later by the
// target code; controls are the same stream construction with the event
// positions permuted before day assignment and no target appended, so the
// two classes match in per-code marginals and differ only in order.
std::vector<RawPatient> generate_cohort_corpus(const SynthConfig& config);

}  // namespace ehr
