#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ehr {

enum class EventKind : uint8_t { Diagnosis = 0, Medication = 1 };

enum class Sex : uint8_t { F = 0, M = 1 };

const char* to_string(EventKind kind);
const char* to_string(Sex sex);
EventKind parse_event_kind(const std::string& s);  // throws DataError
Sex parse_sex(const std::string& s);               // throws DataError

// A medical event type. Diagnosis and medication codes with identical
// strings are distinct entries, so the pair is the key everywhere.
struct EventCode {
  std::string code;
  EventKind kind = EventKind::Diagnosis;

  bool operator==(const EventCode&) const = default;
  auto operator<=>(const EventCode&) const = default;
};

struct EventCodeHash {
  size_t operator()(const EventCode& c) const {
    const size_t h = std::hash<std::string>{}(c.code);
    return h ^ (static_cast<size_t>(c.kind) + 0x9e3779b97f4a7c15ULL + (h << 6));
  }
};

// Event as read from file, before vocabulary indices exist.
struct RawEvent {
  std::string code;
  EventKind kind = EventKind::Diagnosis;
  int64_t day = 0;  // days since a per-dataset epoch
};

struct RawPatient {
  std::string patient_id;
  Sex sex = Sex::F;
  int birth_year = 0;
  std::vector<RawEvent> events;  // file order; multiplicity is meaningful
};

struct MedicalEvent {
  uint32_t code_index = 0;
  int64_t day = 0;
};

// Indexed record. Events sorted ascending by (day, code_index); the
// code_index tie rule is how same-day events are ordered downstream.
struct PatientRecord {
  std::string patient_id;
  Sex sex = Sex::F;
  int birth_year = 0;
  std::vector<MedicalEvent> events;
};

// Dense index space over retained event codes. Indices are assigned by
// descending occurrence count, ties broken by (code, kind) ascending.
class Vocabulary {
 public:
  static Vocabulary build(const std::vector<RawPatient>& records, int min_count);

  uint32_t size() const { return static_cast<uint32_t>(codes_.size()); }
  int min_count() const { return min_count_; }

  std::optional<uint32_t> index_of(const EventCode& code) const;
  const EventCode& code_at(uint32_t index) const { return codes_.at(index); }
  EventKind kind_at(uint32_t index) const { return codes_.at(index).kind; }
  uint64_t count_at(uint32_t index) const { return counts_.at(index); }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<EventCode> codes_;
  std::vector<uint64_t> counts_;
  std::unordered_map<EventCode, uint32_t, EventCodeHash> index_;
  int min_count_ = 1;
};

// Subset of event kinds retained by a kind filter; non-empty by contract.
struct KindSet {
  bool diagnosis = true;
  bool medication = true;

  bool contains(EventKind kind) const {
    return kind == EventKind::Diagnosis ? diagnosis : medication;
  }
  bool empty() const { return !diagnosis && !medication; }
};

// JSON-lines ingestion. One RawPatient per line of the patients file,
// events appended from the events file; patients with zero events are
// retained. Malformed lines raise DataError naming the offending line.
std::vector<RawPatient> load_patients(const std::string& patients_path,
                                      const std::string& events_path);

void save_patients(const std::vector<RawPatient>& records,
                   const std::string& patients_path,
                   const std::string& events_path);

// Resolves raw codes to vocabulary indices, drops events whose code was
// filtered out of the vocabulary and sorts each patient's events by
// (day, code_index).
std::vector<PatientRecord> index_records(const std::vector<RawPatient>& records,
                                         const Vocabulary& vocab);

PatientRecord filter_kinds(const PatientRecord& record, const KindSet& allowed,
                           const Vocabulary& vocab);

// Per-patient index sequences in record order, ready for embedding training.
std::vector<std::vector<uint32_t>> index_sequences(
    const std::vector<PatientRecord>& records);

}  // namespace ehr
