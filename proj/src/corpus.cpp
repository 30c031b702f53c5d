#include "reptrack/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"
#include "reptrack/error.hpp"

namespace reptrack {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 2> kVictimNames{"SLF", "nSLF"};
constexpr std::array<std::string_view, 3> kGenderNames{"FEM", "MAL", "UNS"};
constexpr std::array<std::string_view, 6> kPerpetratorNames{"INT", "FAM", "POW", "FRN", "STR", "PNM"};
constexpr std::array<std::string_view, 2> kDetectionNames{"nSVR", "SVR"};
constexpr std::array<std::string_view, 4> kViolenceNames{"NSE", "OTH", "PEN", "USC"};

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<Enum>(i);
  throw DataError("unknown " + std::string(what) + " code '" + std::string(s) + "'");
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string normalized_text_key(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

void validate_document(const Document& doc) {
  if (doc.id.empty()) throw DataError("document id is empty");
  if (trim(doc.text).empty()) throw DataError("document '" + doc.id + "' has empty text");
}

AnnotationRecord annotation_from_fields(const std::string& doc_id, const std::string& code,
                                        const std::optional<std::string>& victim,
                                        const std::optional<std::string>& gender,
                                        const std::optional<std::string>& perpetrator,
                                        const std::optional<Range>& span) {
  AnnotationRecord a;
  a.doc_id = doc_id;
  if (code.size() != 1 || code[0] < 'a' || code[0] > 'i')
    throw DataError("unknown violence code '" + code + "'");
  a.raw_violence_code = code[0];
  if (victim) a.victim = parse_victim(*victim);
  if (gender) a.gender = parse_gender(*gender);
  if (perpetrator) a.perpetrator = parse_perpetrator(*perpetrator);
  a.perpetrator_span = span;
  return a;
}

std::optional<std::string> opt_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

Range parse_span_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw DataError("span must be [start, end] integers");
  auto s = j[0].get<long long>(), e = j[1].get<long long>();
  if (s < 0 || e < 0) throw DataError("span offsets must be non-negative");
  return Range{static_cast<std::size_t>(s), static_cast<std::size_t>(e)};
}

// CSV (RFC 4180). Fixed column order on write; columns resolved by header name on read.
constexpr std::array<std::string_view, 8> kCsvColumns{"id",     "text",   "source_url", "violence_code",
                                                      "victim", "gender", "perpetrator", "span"};

std::string csv_quote(std::string_view field) {
  bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Reads one CSV record; returns false at EOF. `line_no` tracks the physical line
// the record started on.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no,
                     std::size_t& record_line) {
  fields.clear();
  int c = in.peek();
  if (c == EOF) return false;
  record_line = line_no + 1;
  std::string field;
  bool quoted = false, in_quotes = false, any = false;
  while ((c = in.get()) != EOF) {
    any = true;
    char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line_no;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty() && !quoted) {
      quoted = in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      quoted = false;
    } else if (ch == '\n') {
      ++line_no;
      break;
    } else if (ch == '\r') {
      if (in.peek() == '\n') continue;
    } else {
      if (quoted) throw DataError("unexpected character after closing quote", record_line);
      field.push_back(ch);
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field", record_line);
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

Range parse_span_text(const std::string& s) {
  try {
    return parse_span_json(json::parse(s));
  } catch (const json::exception&) {
    throw DataError("span must be [start, end] integers");
  }
}

std::vector<CorpusRecord> read_csv(std::istream& in) {
  std::vector<CorpusRecord> out;
  std::vector<std::string> fields;
  std::size_t line_no = 0, record_line = 0;
  if (!read_csv_record(in, fields, line_no, record_line)) return out;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < fields.size(); ++i) col[std::string(trim(fields[i]))] = i;
  if (!col.count("id") || !col.count("text")) throw DataError("CSV header must contain id and text", 1);

  while (read_csv_record(in, fields, line_no, record_line)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    try {
      if (fields.size() != col.size())
        throw DataError("expected " + std::to_string(col.size()) + " fields, got " +
                        std::to_string(fields.size()));
      auto get = [&](std::string_view name) -> std::optional<std::string> {
        auto it = col.find(std::string(name));
        if (it == col.end() || fields[it->second].empty()) return std::nullopt;
        return fields[it->second];
      };
      CorpusRecord rec;
      rec.doc.id = get("id").value_or("");
      rec.doc.text = get("text").value_or("");
      rec.doc.source_url = get("source_url");
      validate_document(rec.doc);
      if (auto code = get("violence_code")) {
        std::optional<Range> span;
        if (auto s = get("span")) span = parse_span_text(*s);
        rec.annotation = annotation_from_fields(rec.doc.id, *code, get("victim"), get("gender"),
                                                get("perpetrator"), span);
        validate_annotation(*rec.annotation, rec.doc.text);
      }
      out.push_back(std::move(rec));
    } catch (const DataError& e) {
      if (e.line()) throw;
      throw DataError(e.what(), record_line);
    }
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<CorpusRecord>& records) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out << (i ? "," : "") << kCsvColumns[i];
  out << '\n';
  for (const auto& r : records) {
    std::array<std::string, 8> f;
    f[0] = r.doc.id;
    f[1] = r.doc.text;
    f[2] = r.doc.source_url.value_or("");
    if (const auto& a = r.annotation) {
      f[3] = std::string(1, a->raw_violence_code);
      if (a->victim) f[4] = to_string(*a->victim);
      if (a->gender) f[5] = to_string(*a->gender);
      if (a->perpetrator) f[6] = to_string(*a->perpetrator);
      if (a->perpetrator_span)
        f[7] = "[" + std::to_string(a->perpetrator_span->start) + "," +
               std::to_string(a->perpetrator_span->end) + "]";
    }
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << csv_quote(f[i]);
    out << '\n';
  }
}

void check_unique_ids(const std::vector<CorpusRecord>& records) {
  std::unordered_set<std::string> seen;
  for (const auto& r : records)
    if (!seen.insert(r.doc.id).second) throw DataError("duplicate document id '" + r.doc.id + "'");
}

}  // namespace

std::string_view to_string(Victim v) { return kVictimNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Gender g) { return kGenderNames[static_cast<std::size_t>(g)]; }
std::string_view to_string(Perpetrator p) { return kPerpetratorNames[static_cast<std::size_t>(p)]; }
std::string_view to_string(Detection d) { return kDetectionNames[static_cast<std::size_t>(d)]; }
std::string_view to_string(Violence v) { return kViolenceNames[static_cast<std::size_t>(v)]; }

Victim parse_victim(std::string_view s) { return parse_enum<Victim>(s, kVictimNames, "victim"); }
Gender parse_gender(std::string_view s) { return parse_enum<Gender>(s, kGenderNames, "gender"); }
Perpetrator parse_perpetrator(std::string_view s) {
  return parse_enum<Perpetrator>(s, kPerpetratorNames, "perpetrator");
}
Detection parse_detection(std::string_view s) { return parse_enum<Detection>(s, kDetectionNames, "detection"); }
Violence parse_violence(std::string_view s) { return parse_enum<Violence>(s, kViolenceNames, "violence"); }

bool Document::is_retweet() const {
  auto t = trim(text);
  if (t.size() < 4) return false;
  return std::tolower(static_cast<unsigned char>(t[0])) == 'r' &&
         std::tolower(static_cast<unsigned char>(t[1])) == 't' && t[2] == ' ' && t[3] == '@';
}

void validate_annotation(const AnnotationRecord& a, std::string_view text) {
  if (a.raw_violence_code < 'a' || a.raw_violence_code > 'i')
    throw DataError(std::string("unknown violence code '") + a.raw_violence_code + "'");
  if (a.raw_violence_code == 'i' && (a.victim || a.gender || a.perpetrator || a.perpetrator_span))
    throw DataError("non-report annotation (code i) must not carry characterization fields");
  if (a.perpetrator == Perpetrator::kNotMentioned && a.perpetrator_span)
    throw DataError("PNM annotation must not carry a perpetrator span");
  if (const auto& s = a.perpetrator_span) {
    if (s->start >= s->end) throw DataError("span start must be < end");
    if (s->end > text.size()) throw DataError("span exceeds text length");
  }
}

CorpusRecord parse_jsonl_record(std::string_view line, std::size_t line_no) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw DataError("record must be a JSON object");
    CorpusRecord rec;
    auto id = opt_string(j, "id");
    auto text = opt_string(j, "text");
    if (!id) throw DataError("missing 'id'");
    if (!text) throw DataError("missing 'text'");
    rec.doc.id = *id;
    rec.doc.text = *text;
    rec.doc.source_url = opt_string(j, "source_url");
    if (auto m = j.find("meta"); m != j.end() && !m->is_null()) {
      if (!m->is_object()) throw DataError("'meta' must be an object of strings");
      for (const auto& [k, v] : m->items()) {
        if (!v.is_string()) throw DataError("'meta' values must be strings");
        rec.doc.meta[k] = v.get<std::string>();
      }
    }
    validate_document(rec.doc);
    if (auto a = j.find("annotation"); a != j.end() && !a->is_null()) {
      if (!a->is_object()) throw DataError("'annotation' must be an object");
      auto code = opt_string(*a, "violence_code");
      if (!code) throw DataError("annotation missing 'violence_code'");
      std::optional<Range> span;
      if (auto s = a->find("span"); s != a->end() && !s->is_null()) span = parse_span_json(*s);
      rec.annotation = annotation_from_fields(rec.doc.id, *code, opt_string(*a, "victim"),
                                              opt_string(*a, "gender"), opt_string(*a, "perpetrator"), span);
      validate_annotation(*rec.annotation, rec.doc.text);
    }
    return rec;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed JSON: ") + e.what(), line_no);
  } catch (const DataError& e) {
    if (e.line()) throw;
    throw DataError(e.what(), line_no);
  }
}

std::string to_jsonl(const CorpusRecord& r) {
  json j;
  j["id"] = r.doc.id;
  j["text"] = r.doc.text;
  if (r.doc.source_url) j["source_url"] = *r.doc.source_url;
  if (!r.doc.meta.empty()) j["meta"] = r.doc.meta;
  if (const auto& a = r.annotation) {
    json ja;
    ja["violence_code"] = std::string(1, a->raw_violence_code);
    if (a->victim) ja["victim"] = to_string(*a->victim);
    if (a->gender) ja["gender"] = to_string(*a->gender);
    if (a->perpetrator) ja["perpetrator"] = to_string(*a->perpetrator);
    if (a->perpetrator_span) ja["span"] = {a->perpetrator_span->start, a->perpetrator_span->end};
    j["annotation"] = std::move(ja);
  }
  return j.dump();
}

std::vector<CorpusRecord> read_corpus(std::istream& in, CorpusFormat format) {
  std::vector<CorpusRecord> out;
  if (format == CorpusFormat::kCsv) {
    out = read_csv(in);
  } else {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      out.push_back(parse_jsonl_record(line, line_no));
    }
  }
  check_unique_ids(out);
  return out;
}

std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file '" + path.string() + "'");
  return read_corpus(in, format);
}

void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records, CorpusFormat format) {
  if (format == CorpusFormat::kCsv) {
    write_csv(out, records);
    return;
  }
  for (const auto& r : records) out << to_jsonl(r) << '\n';
}

void write_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records,
                  CorpusFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file '" + path.string() + "'");
  write_corpus(out, records, format);
}

CorpusFormat format_for(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? CorpusFormat::kCsv : CorpusFormat::kJsonl;
}

std::vector<CorpusRecord> deduplicate(const std::vector<CorpusRecord>& corpus) {
  std::vector<CorpusRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& r : corpus) {
    if (r.doc.is_retweet()) continue;
    std::string key = r.doc.source_url ? "url:" + *r.doc.source_url : "text:" + normalized_text_key(r.doc.text);
    if (seen.insert(std::move(key)).second) out.push_back(r);
  }
  return out;
}

std::vector<Document> deduplicate(const std::vector<Document>& corpus) {
  std::vector<CorpusRecord> wrapped;
  wrapped.reserve(corpus.size());
  for (const auto& d : corpus) wrapped.push_back({d, std::nullopt});
  std::vector<Document> out;
  for (auto& r : deduplicate(wrapped)) out.push_back(std::move(r.doc));
  return out;
}

TaskLabels collapse_labels(const AnnotationRecord& record) {
  TaskLabels labels;
  switch (record.raw_violence_code) {
    case 'a': case 'b': case 'c': case 'd': case 'e':
      labels.violence = Violence::kPenetration;
      break;
    case 'f':
      labels.violence = Violence::kUnwantedContact;
      break;
    case 'g':
      labels.violence = Violence::kNonContact;
      break;
    case 'h':
      labels.violence = Violence::kOther;
      break;
    case 'i':
      return labels;
    default:
      throw DataError(std::string("unknown violence code '") + record.raw_violence_code + "'");
  }
  labels.detection = Detection::kReport;
  labels.victim = record.victim;
  labels.gender = record.gender;
  labels.perpetrator = record.perpetrator;
  return labels;
}

}  // namespace reptrack
