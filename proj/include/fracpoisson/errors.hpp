#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracpoisson {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, double residual, int iterations)
      : NumericalError(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

class AssemblyError : public Error {
 public:
  AssemblyError(const std::string& what, std::size_t cell) : Error(what), cell_(cell) {}
  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IllConditionedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace fracpoisson
