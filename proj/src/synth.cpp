#include "ehr/synth.hpp"

#include <algorithm>
#include <cstdio>

#include "ehr/errors.hpp"
#include "ehr/rng.hpp"

namespace ehr {

namespace {

constexpr uint32_t kSegmentMin = 16;
constexpr uint32_t kSegmentMax = 48;

std::string format_patient_id(uint32_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "p%06u", i);
  return buf;
}

struct Demographics {
  Sex sex;
  int birth_year;
};

Demographics draw_demographics(Rng& rng) {
  const Sex sex = rng.bernoulli(0.5) ? Sex::M : Sex::F;
  const int birth_year = 1930 + static_cast<int>(rng.below(71));
  return {sex, birth_year};
}

// Concept-local code stream of the requested length, as synthetic ids.
std::vector<uint32_t> draw_concept_stream(const SynthConfig& c, uint32_t length,
                                          Rng& rng) {
  const uint32_t block = c.vocab_size / c.concept_count;
  std::vector<uint32_t> stream;
  stream.reserve(length);
  while (stream.size() < length) {
    const auto topic = static_cast<uint32_t>(rng.below(c.concept_count));
    const auto seg_len = static_cast<uint32_t>(rng.range(kSegmentMin, kSegmentMax));
    for (uint32_t i = 0; i < seg_len && stream.size() < length; ++i)
      stream.push_back(topic * block + static_cast<uint32_t>(rng.below(block)));
  }
  return stream;
}

std::vector<int64_t> assign_days(const SynthConfig& c, size_t n, Rng& rng) {
  std::vector<int64_t> days(n);
  int64_t day = 0;
  for (size_t i = 0; i < n; ++i) {
    if (i > 0) day += rng.range(c.day_step_min, c.day_step_max);
    days[i] = day;
  }
  return days;
}

}  // namespace

void SynthConfig::validate() const {
  if (vocab_size == 0 || concept_count == 0)
    throw ConfigError("synth: vocab_size and concept_count must be positive");
  if (vocab_size % concept_count != 0)
    throw ConfigError("synth: concept_count must divide vocab_size");
  if (seq_len_min < 1 || seq_len_max < seq_len_min)
    throw ConfigError("synth: invalid seq_len range");
  if (!(case_fraction > 0.0 && case_fraction < 1.0))
    throw ConfigError("synth: case_fraction must be in (0,1)");
  if (day_step_min < 0 || day_step_max < day_step_min)
    throw ConfigError("synth: invalid day_step range");
}

std::string synth_code_string(uint32_t id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "e%04u", id);
  return buf;
}

EventKind synth_code_kind(uint32_t id) {
  return id % 2 == 0 ? EventKind::Diagnosis : EventKind::Medication;
}

bool parse_synth_code(const std::string& code, uint32_t* id) {
  if (code.size() != 5 || code[0] != 'e') return false;
  uint32_t value = 0;
  for (size_t i = 1; i < code.size(); ++i) {
    if (code[i] < '0' || code[i] > '9') return false;
    value = value * 10 + static_cast<uint32_t>(code[i] - '0');
  }
  *id = value;
  return true;
}

std::vector<RawPatient> generate_corpus(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  std::vector<RawPatient> out;
  out.reserve(config.patients);
  for (uint32_t p = 0; p < config.patients; ++p) {
    RawPatient patient;
    patient.patient_id = format_patient_id(p);
    const auto demo = draw_demographics(rng);
    patient.sex = demo.sex;
    patient.birth_year = demo.birth_year;

    const auto length =
        static_cast<uint32_t>(rng.range(config.seq_len_min, config.seq_len_max));
    const auto stream = draw_concept_stream(config, length, rng);
    const auto days = assign_days(config, stream.size(), rng);
    patient.events.reserve(stream.size());
    for (size_t i = 0; i < stream.size(); ++i)
      patient.events.push_back(
          {synth_code_string(stream[i]), synth_code_kind(stream[i]), days[i]});
    out.push_back(std::move(patient));
  }
  return out;
}

std::vector<RawPatient> generate_cohort_corpus(const SynthConfig& config) {
  config.validate();
  if (config.motif.first.empty() || config.motif.second.empty())
    throw ConfigError("synth: cohort corpus needs both motif codes");
  if (config.target_code.empty())
    throw ConfigError("synth: cohort corpus needs a target code");
  if (config.motif.max_gap < 1) throw ConfigError("synth: motif max_gap must be >= 1");
  const uint32_t motif_span = static_cast<uint32_t>(config.motif.max_gap) + 1;
  if (config.seq_len_max < motif_span)
    throw ConfigError("synth: seq_len range too short to hold the motif");

  Rng rng(config.seed);

  // Exact case count, assigned to shuffled patient slots.
  const auto n_cases = static_cast<uint32_t>(
      static_cast<double>(config.patients) * config.case_fraction + 0.5);
  std::vector<uint8_t> is_case(config.patients, 0);
  for (uint32_t i = 0; i < n_cases && i < config.patients; ++i) is_case[i] = 1;
  rng.shuffle(is_case);

  std::vector<RawPatient> out;
  out.reserve(config.patients);
  for (uint32_t p = 0; p < config.patients; ++p) {
    RawPatient patient;
    patient.patient_id = format_patient_id(p);
    const auto demo = draw_demographics(rng);
    patient.sex = demo.sex;
    patient.birth_year = demo.birth_year;

    // Both classes share the body construction: concept-local stream with
    // one planted motif occurrence. Controls get their positions permuted,
    // which destroys order while keeping per-code counts.
    const auto length = static_cast<uint32_t>(
        rng.range(std::max(config.seq_len_min, motif_span), config.seq_len_max));
    auto stream_ids = draw_concept_stream(config, length, rng);
    std::vector<RawEvent> body(stream_ids.size());
    for (size_t i = 0; i < stream_ids.size(); ++i)
      body[i] = {synth_code_string(stream_ids[i]), synth_code_kind(stream_ids[i]), 0};

    const auto gap = static_cast<uint32_t>(rng.range(1, config.motif.max_gap));
    const auto pos = static_cast<uint32_t>(rng.below(length - gap));
    body[pos] = {config.motif.first, EventKind::Diagnosis, 0};
    body[pos + gap] = {config.motif.second, EventKind::Diagnosis, 0};

    if (!is_case[p]) rng.shuffle(body);

    const auto days = assign_days(config, body.size(), rng);
    for (size_t i = 0; i < body.size(); ++i) body[i].day = days[i];

    if (is_case[p]) {
      const int64_t target_day =
          days.back() + rng.range(1, std::max(1, config.day_step_max));
      body.push_back({config.target_code, EventKind::Diagnosis, target_day});
    }
    patient.events = std::move(body);
    out.push_back(std::move(patient));
  }
  return out;
}

}  // namespace ehr
