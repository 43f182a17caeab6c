#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace textmill {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data. Carries the 1-based line number when the format is
/// line oriented (JSONL, ARPA, triple files).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : Error(line ? "line " + std::to_string(*line) + ": " + what : what), line_(line) {}

  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

/// Invalid configuration: unknown names, bad parameter types, missing files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::size_t written = 0) : Error(what), written_(written) {}

  /// Number of records successfully written before the failure.
  std::size_t written() const noexcept { return written_; }

 private:
  std::size_t written_;
};

}  // namespace textmill
