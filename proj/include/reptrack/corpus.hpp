#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reptrack {

/// Half-open range [start, end). Used for byte offsets into text and for token ranges.
struct Range {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return end <= start; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> source_url;
  std::map<std::string, std::string> meta;

  /// Text starts with "rt @" (case-insensitive) once leading whitespace is trimmed.
  bool is_retweet() const;

  friend bool operator==(const Document&, const Document&) = default;
};

enum class Victim { kSelf, kNotSelf };
enum class Gender { kFemale, kMale, kUnspecified };
enum class Perpetrator { kIntimate, kFamily, kPower, kFriend, kStranger, kNotMentioned };
enum class Detection { kNotReport, kReport };
enum class Violence { kNonContact, kOther, kPenetration, kUnwantedContact };

std::string_view to_string(Victim v);
std::string_view to_string(Gender g);
std::string_view to_string(Perpetrator p);
std::string_view to_string(Detection d);
std::string_view to_string(Violence v);

// Parsers throw DataError on unknown codes.
Victim parse_victim(std::string_view s);
Gender parse_gender(std::string_view s);
Perpetrator parse_perpetrator(std::string_view s);
Detection parse_detection(std::string_view s);
Violence parse_violence(std::string_view s);

/// One annotator's answers. `raw_violence_code` is 'a'..'i'; 'i' means no report.
/// `perpetrator_span` is a byte range into the original Document::text.
struct AnnotationRecord {
  std::string doc_id;
  char raw_violence_code = 'i';
  std::optional<Victim> victim;
  std::optional<Gender> gender;
  std::optional<Perpetrator> perpetrator;
  std::optional<Range> perpetrator_span;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// Per-task labels after collapsing the raw codes.
struct TaskLabels {
  Detection detection = Detection::kNotReport;
  std::optional<Violence> violence;
  std::optional<Victim> victim;
  std::optional<Gender> gender;
  std::optional<Perpetrator> perpetrator;
};

struct CorpusRecord {
  Document doc;
  std::optional<AnnotationRecord> annotation;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

enum class CorpusFormat { kJsonl, kCsv };

/// Throws DataError if the annotation violates the schema invariants for `text`.
void validate_annotation(const AnnotationRecord& record, std::string_view text);

std::vector<CorpusRecord> read_corpus(std::istream& in, CorpusFormat format);
std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path, CorpusFormat format);
void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records, CorpusFormat format);
void write_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records,
                  CorpusFormat format);

/// Guesses the format from the file extension (".csv" → CSV, anything else → JSONL).
CorpusFormat format_for(const std::filesystem::path& path);

// JSONL line codec, shared by the CLI streaming commands.
CorpusRecord parse_jsonl_record(std::string_view line, std::size_t line_no);
std::string to_jsonl(const CorpusRecord& record);

/// Drops retweets, then keeps the first document per duplicate key
/// (source_url when present, else lowercased whitespace-normalized text).
std::vector<Document> deduplicate(const std::vector<Document>& corpus);
std::vector<CorpusRecord> deduplicate(const std::vector<CorpusRecord>& corpus);

TaskLabels collapse_labels(const AnnotationRecord& record);

}  // namespace reptrack
