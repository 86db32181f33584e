#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace nlirf {

/// Argument outside the documented domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A JSON document does not match the documented schema.
class SchemaError : public DomainError {
 public:
  SchemaError(std::string path, const std::string& what)
      : DomainError(path + ": " + what), path_(std::move(path)) {}
  /// Dotted field path, e.g. "model.params.Phi".
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A simulated path left the finite range (|y| > 1e12 or non-finite).
class DivergedPathError : public std::runtime_error {
 public:
  DivergedPathError(std::size_t index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  /// First offending time index (0-based row of the state matrix).
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Operation not available for the model family.
class UnsupportedFamilyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditional CDF evaluated to exactly 0 or 1.
class SaturationError : public std::runtime_error {
 public:
  SaturationError(std::size_t t, std::size_t component, const std::string& what)
      : std::runtime_error(what), t_(t), component_(component) {}
  std::size_t t() const noexcept { return t_; }
  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t t_;
  std::size_t component_;
};

class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateDirectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateVarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The mixing quadratic has a negative discriminant.
class NoRealRootError : public std::runtime_error {
 public:
  NoRealRootError(double regression_residual, const std::string& what)
      : std::runtime_error(what), residual_(regression_residual) {}
  double regression_residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace nlirf
