#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pqsim {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or an invariant of a domain type was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A run configuration could not be parsed or does not validate.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Propagation produced a non-finite state.
class NumericalAbort : public Error {
 public:
  NumericalAbort(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// The final field still carries probability inside the scattering region.
class NotScattered : public Error {
 public:
  NotScattered(const std::string& what, double residual)
      : Error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace pqsim
