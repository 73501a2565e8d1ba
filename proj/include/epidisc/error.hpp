#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epidisc {

/// Raised when an argument violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a request is well-formed but too large to honour
/// (e.g. an exhaustive enumeration beyond the horizon guard).
class Refusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  /// 1-based line of the offending entry, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(std::string path)
      : std::runtime_error("missing upstream artifact: " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace epidisc
