#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccws {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad vector, p <= 0, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// A similarity kernel was asked to compare two empty vectors.
class UndefinedSimilarityError : public Error {
 public:
  using Error::Error;
};

/// A hash was requested for a vector with empty support.
class UndefinedHashError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based; 0 means "not tied to a line".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid parameters or generator configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// K-anonymity cannot be achieved (fewer users than K).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A user or cohort identifier could not be resolved.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// An assignment does not partition the user set.
class PartitionError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ccws
