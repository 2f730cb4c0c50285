#pragma once

#include <stdexcept>
#include <string>

namespace epigraph {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch between an input and what an operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Failure inside a numeric routine (eigen-solver, empty distribution, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite cost.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, int iteration)
      : NumericError(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Filesystem or codec failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A file could be read but its contents are not well formed.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace epigraph
