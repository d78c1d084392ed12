#include "ehr/data_model.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "ehr/errors.hpp"
#include "json.hpp"

namespace ehr {

using nlohmann::json;

const char* to_string(EventKind kind) {
  return kind == EventKind::Diagnosis ? "diagnosis" : "medication";
}

const char* to_string(Sex sex) { return sex == Sex::F ? "F" : "M"; }

EventKind parse_event_kind(const std::string& s) {
  if (s == "diagnosis") return EventKind::Diagnosis;
  if (s == "medication") return EventKind::Medication;
  throw DataError("unknown event kind \"" + s + "\"");
}

Sex parse_sex(const std::string& s) {
  if (s == "F") return Sex::F;
  if (s == "M") return Sex::M;
  throw DataError("unknown sex \"" + s + "\"");
}

namespace {

[[noreturn]] void line_error(const std::string& path, size_t line_no,
                             const std::string& what) {
  throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

json parse_line(const std::string& path, size_t line_no, const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) line_error(path, line_no, "invalid JSON object");
  return j;
}

std::string require_string(const json& j, const char* key, const std::string& path,
                           size_t line_no) {
  if (!j.contains(key) || !j[key].is_string())
    line_error(path, line_no, std::string("missing string field \"") + key + "\"");
  return j[key].get<std::string>();
}

int64_t require_int(const json& j, const char* key, const std::string& path,
                    size_t line_no) {
  if (!j.contains(key) || !j[key].is_number_integer())
    line_error(path, line_no, std::string("missing integer field \"") + key + "\"");
  return j[key].get<int64_t>();
}

}  // namespace

std::vector<RawPatient> load_patients(const std::string& patients_path,
                                      const std::string& events_path) {
  std::ifstream pf(patients_path);
  if (!pf) throw ConfigError("cannot open patients file: " + patients_path);
  std::ifstream ef(events_path);
  if (!ef) throw ConfigError("cannot open events file: " + events_path);

  std::vector<RawPatient> records;
  std::unordered_map<std::string, size_t> by_id;

  std::string line;
  size_t line_no = 0;
  while (std::getline(pf, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_line(patients_path, line_no, line);
    RawPatient p;
    p.patient_id = require_string(j, "patient_id", patients_path, line_no);
    try {
      p.sex = parse_sex(require_string(j, "sex", patients_path, line_no));
    } catch (const DataError& e) {
      line_error(patients_path, line_no, e.what());
    }
    p.birth_year = static_cast<int>(require_int(j, "birth_year", patients_path, line_no));
    if (by_id.count(p.patient_id))
      line_error(patients_path, line_no, "duplicate patient_id \"" + p.patient_id + "\"");
    by_id.emplace(p.patient_id, records.size());
    records.push_back(std::move(p));
  }

  line_no = 0;
  while (std::getline(ef, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_line(events_path, line_no, line);
    const std::string pid = require_string(j, "patient_id", events_path, line_no);
    const auto it = by_id.find(pid);
    if (it == by_id.end())
      line_error(events_path, line_no, "event for unknown patient_id \"" + pid + "\"");
    RawEvent ev;
    ev.code = require_string(j, "code", events_path, line_no);
    if (ev.code.empty()) line_error(events_path, line_no, "empty event code");
    try {
      ev.kind = parse_event_kind(require_string(j, "kind", events_path, line_no));
    } catch (const DataError& e) {
      line_error(events_path, line_no, e.what());
    }
    ev.day = require_int(j, "day", events_path, line_no);
    if (ev.day < 0) line_error(events_path, line_no, "negative day");
    records[it->second].events.push_back(std::move(ev));
  }
  return records;
}

void save_patients(const std::vector<RawPatient>& records,
                   const std::string& patients_path,
                   const std::string& events_path) {
  std::ofstream pf(patients_path);
  if (!pf) throw ConfigError("cannot open for writing: " + patients_path);
  std::ofstream ef(events_path);
  if (!ef) throw ConfigError("cannot open for writing: " + events_path);

  for (const auto& p : records) {
    json j{{"patient_id", p.patient_id},
           {"sex", to_string(p.sex)},
           {"birth_year", p.birth_year}};
    pf << j.dump() << "\n";
    for (const auto& ev : p.events) {
      json e{{"patient_id", p.patient_id},
             {"code", ev.code},
             {"kind", to_string(ev.kind)},
             {"day", ev.day}};
      ef << e.dump() << "\n";
    }
  }
  if (!pf || !ef) throw ConfigError("write failed");
}

Vocabulary Vocabulary::build(const std::vector<RawPatient>& records, int min_count) {
  if (min_count < 1) throw ConfigError("min_count must be >= 1");

  std::map<EventCode, uint64_t> counts;
  for (const auto& p : records)
    for (const auto& ev : p.events) counts[EventCode{ev.code, ev.kind}] += 1;

  struct Entry {
    EventCode code;
    uint64_t count;
  };
  std::vector<Entry> retained;
  for (auto& [code, count] : counts)
    if (count >= static_cast<uint64_t>(min_count)) retained.push_back({code, count});
  if (retained.empty())
    throw DataError("empty vocabulary: no code occurs at least " +
                    std::to_string(min_count) + " times");

  std::sort(retained.begin(), retained.end(), [](const Entry& a, const Entry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.code < b.code;
  });

  Vocabulary v;
  v.min_count_ = min_count;
  v.codes_.reserve(retained.size());
  v.counts_.reserve(retained.size());
  for (uint32_t i = 0; i < retained.size(); ++i) {
    v.index_.emplace(retained[i].code, i);
    v.codes_.push_back(std::move(retained[i].code));
    v.counts_.push_back(retained[i].count);
  }
  return v;
}

std::optional<uint32_t> Vocabulary::index_of(const EventCode& code) const {
  const auto it = index_.find(code);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << size() << " " << min_count_ << "\n";
  for (uint32_t i = 0; i < size(); ++i)
    f << i << " " << codes_[i].code << " " << to_string(codes_[i].kind) << " "
      << counts_[i] << "\n";
  if (!f) throw ConfigError("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open vocabulary file: " + path);

  std::string line;
  if (!std::getline(f, line)) throw DataError(path + ": missing header");
  std::istringstream header(line);
  uint32_t v = 0;
  int min_count = 0;
  if (!(header >> v >> min_count) || min_count < 1)
    throw DataError(path + ": malformed header");

  Vocabulary vocab;
  vocab.min_count_ = min_count;
  size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    // "index code kind count"; the code may itself contain spaces, so the
    // kind and count are taken from the right.
    std::vector<std::string> tokens;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (tokens.size() < 4) line_error(path, line_no, "malformed vocabulary row");
    const size_t n = tokens.size();
    EventCode code;
    code.kind = parse_event_kind(tokens[n - 2]);
    code.code = tokens[1];
    for (size_t i = 2; i + 2 < n; ++i) code.code += " " + tokens[i];
    uint64_t count = 0;
    uint32_t index = 0;
    try {
      index = static_cast<uint32_t>(std::stoul(tokens[0]));
      count = std::stoull(tokens[n - 1]);
    } catch (const std::exception&) {
      line_error(path, line_no, "malformed vocabulary row");
    }
    if (index != vocab.codes_.size())
      line_error(path, line_no, "vocabulary rows out of order");
    vocab.index_.emplace(code, index);
    vocab.codes_.push_back(std::move(code));
    vocab.counts_.push_back(count);
  }
  if (vocab.codes_.size() != v)
    throw DataError(path + ": header declares " + std::to_string(v) + " rows, found " +
                    std::to_string(vocab.codes_.size()));
  return vocab;
}

std::vector<PatientRecord> index_records(const std::vector<RawPatient>& records,
                                         const Vocabulary& vocab) {
  std::vector<PatientRecord> out;
  out.reserve(records.size());
  for (const auto& raw : records) {
    PatientRecord rec;
    rec.patient_id = raw.patient_id;
    rec.sex = raw.sex;
    rec.birth_year = raw.birth_year;
    rec.events.reserve(raw.events.size());
    for (const auto& ev : raw.events) {
      const auto idx = vocab.index_of(EventCode{ev.code, ev.kind});
      if (idx) rec.events.push_back({*idx, ev.day});
    }
    std::sort(rec.events.begin(), rec.events.end(),
              [](const MedicalEvent& a, const MedicalEvent& b) {
                if (a.day != b.day) return a.day < b.day;
                return a.code_index < b.code_index;
              });
    out.push_back(std::move(rec));
  }
  return out;
}

PatientRecord filter_kinds(const PatientRecord& record, const KindSet& allowed,
                           const Vocabulary& vocab) {
  if (allowed.empty()) throw ConfigError("kind filter must allow at least one kind");
  PatientRecord out;
  out.patient_id = record.patient_id;
  out.sex = record.sex;
  out.birth_year = record.birth_year;
  out.events.reserve(record.events.size());
  for (const auto& ev : record.events)
    if (allowed.contains(vocab.kind_at(ev.code_index))) out.events.push_back(ev);
  return out;
}

std::vector<std::vector<uint32_t>> index_sequences(
    const std::vector<PatientRecord>& records) {
  std::vector<std::vector<uint32_t>> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    std::vector<uint32_t> seq;
    seq.reserve(rec.events.size());
    for (const auto& ev : rec.events) seq.push_back(ev.code_index);
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace ehr
