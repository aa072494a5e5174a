#pragma once

#include <stdexcept>
#include <string>

namespace patchlab {

/// Base of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: configuration, files, argument ranges. CLI exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical pipeline could not continue. CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class MalformedFile : public InputError {
 public:
  MalformedFile(const std::string& what, std::size_t byte_offset)
      : InputError(what + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class FeatureUnresolved : public InputError {
 public:
  using InputError::InputError;
};

class NonSimpleCurve : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GridTooCoarse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateCurve : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ClosureViolated : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ClosureSolveFailed : public NumericalError {
 public:
  ClosureSolveFailed(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class MissingHistory : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace patchlab
