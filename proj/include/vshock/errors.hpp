#pragma once

#include <stdexcept>
#include <string>

namespace vshock {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// u_minus == u_plus: there is no shock to speak of.
class DegenerateShockError : public Error {
 public:
  using Error::Error;
};

/// A quadrature or root solve missed its tolerance.
class ToleranceError : public Error {
 public:
  ToleranceError(const std::string& what, std::string where)
      : Error(what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Invalid configuration or precondition violation detected before running.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf appeared in the solution.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace vshock
