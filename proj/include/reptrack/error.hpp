#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace reptrack {

/// Malformed or inconsistent input data (corpus files, annotations, training sets).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
  DataError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::optional<std::size_t> line() const { return line_; }

 private:
  std::optional<std::size_t> line_;
};

class ModelFileError : public std::runtime_error {
 public:
  enum class Kind { kCorrupt, kUnsupportedVersion, kIo };

  ModelFileError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace reptrack
