#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flatdyn {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad expression text, bad arity, invalid configuration.
/// The CLI maps these to exit code 2.
class InputError : public Error {
public:
  using Error::Error;
};

/// Numerical failure at run time. The CLI maps these to exit code 3.
class NumericalError : public Error {
public:
  using Error::Error;
};

class SyntaxError : public InputError {
public:
  SyntaxError(std::size_t offset, std::string expected, const std::string& text)
      : InputError("syntax error at offset " + std::to_string(offset) + ": expected " +
                   expected + " in \"" + text + "\""),
        offset_(offset), expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

private:
  std::size_t offset_;
  std::string expected_;
};

class ArityError : public InputError {
public:
  using InputError::InputError;
};

class InvalidArgument : public InputError {
public:
  using InputError::InputError;
};

class DomainError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class SingularJacobian : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class NotASingularity : public NumericalError {
public:
  explicit NotASingularity(double residual_norm)
      : NumericalError("point is not a singularity: |X(p)| = " + std::to_string(residual_norm)),
        residual_norm_(residual_norm) {}
  double residual_norm() const noexcept { return residual_norm_; }

private:
  double residual_norm_;
};

class InsufficientSamples : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class DegenerateOrbit : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class NoValidSamples : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class WitnessUnavailable : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// A checked precondition of an analysis did not hold (e.g. V has no minimum at 0).
class PreconditionFailed : public NumericalError {
public:
  using NumericalError::NumericalError;
};

}  // namespace flatdyn
