#include "reptrack/serialize.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>

#include "reptrack/error.hpp"

namespace reptrack {
namespace {

[[noreturn]] void corrupt(const std::string& what) {
  throw ModelFileError(ModelFileError::Kind::kCorrupt, "corrupt model file: " + what);
}

}  // namespace

void Writer::sep() {
  if (!at_line_start_) buf_ << ' ';
  at_line_start_ = false;
}

Writer& Writer::word(std::string_view w) {
  sep();
  buf_ << w;
  return *this;
}

Writer& Writer::u(std::uint64_t v) {
  sep();
  buf_ << v;
  return *this;
}

Writer& Writer::i(std::int64_t v) {
  sep();
  buf_ << v;
  return *this;
}

Writer& Writer::d(double v) {
  char tmp[64];
  std::snprintf(tmp, sizeof tmp, "%a", v);
  sep();
  buf_ << tmp;
  return *this;
}

Writer& Writer::str(std::string_view s) {
  sep();
  buf_ << s.size() << ':' << s;
  return *this;
}

Writer& Writer::endl() {
  buf_ << '\n';
  at_line_start_ = true;
  return *this;
}

void Reader::skip_space() {
  while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
}

bool Reader::at_end() {
  skip_space();
  return pos_ >= data_.size();
}

std::string Reader::word() {
  skip_space();
  std::size_t b = pos_;
  while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
  if (b == pos_) corrupt("unexpected end of data");
  return std::string(data_.substr(b, pos_ - b));
}

void Reader::expect(std::string_view w) {
  auto got = word();
  if (got != w) corrupt("expected '" + std::string(w) + "', found '" + got + "'");
}

std::uint64_t Reader::u() {
  auto w = word();
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(w.c_str(), &end, 10);
  if (errno || *end || w[0] == '-') corrupt("bad unsigned integer '" + w + "'");
  return v;
}

std::int64_t Reader::i() {
  auto w = word();
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(w.c_str(), &end, 10);
  if (errno || *end) corrupt("bad integer '" + w + "'");
  return v;
}

double Reader::d() {
  auto w = word();
  char* end = nullptr;
  double v = std::strtod(w.c_str(), &end);
  if (*end) corrupt("bad number '" + w + "'");
  return v;
}

std::string Reader::str() {
  skip_space();
  std::size_t colon = data_.find(':', pos_);
  if (colon == std::string_view::npos) corrupt("bad string header");
  std::string_view len_text = data_.substr(pos_, colon - pos_);
  std::size_t len = 0;
  for (char c : len_text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) corrupt("bad string length");
    len = len * 10 + static_cast<std::size_t>(c - '0');
    if (len > data_.size()) corrupt("string length out of range");
  }
  if (len_text.empty() || colon + 1 + len > data_.size()) corrupt("truncated string");
  std::string s(data_.substr(colon + 1, len));
  pos_ = colon + 1 + len;
  return s;
}

std::size_t Reader::count(std::size_t limit) {
  auto v = u();
  if (v > limit) corrupt("count out of range");
  return static_cast<std::size_t>(v);
}

}  // namespace reptrack
