#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>

namespace reptrack {

/// Whitespace-separated token stream used by the model file. Doubles are
/// written as C99 hex floats so every value round-trips bit-exactly; strings
/// are length-prefixed ("5:hello") and may contain any byte but newline.
class Writer {
 public:
  Writer& word(std::string_view w);
  Writer& u(std::uint64_t v);
  Writer& i(std::int64_t v);
  Writer& d(double v);
  Writer& str(std::string_view s);
  Writer& endl();

  std::string take() { return std::move(buf_).str(); }

 private:
  void sep();
  std::ostringstream buf_;
  bool at_line_start_ = true;
};

/// Any malformed token throws ModelFileError(kCorrupt).
class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string word();
  void expect(std::string_view w);
  std::uint64_t u();
  std::int64_t i();
  double d();
  std::string str();
  bool at_end();

  /// Reads u() and rejects values above `limit` (guards allocations on corrupt input).
  std::size_t count(std::size_t limit = std::size_t{1} << 28);

 private:
  void skip_space();
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace reptrack
