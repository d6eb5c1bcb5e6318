#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gesture {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite coordinates, negative distances or malformed frame JSON.
class InvalidFrame : public Error {
 public:
  using Error::Error;
};

/// A data file could not be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid dataset or invalid argument to a dataset operation.
class DatasetError : public Error {
 public:
  using Error::Error;
};

/// Model training, prediction or serialization failure.
class ModelError : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public ModelError {
 public:
  using ModelError::ModelError;
};

class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace gesture
