#pragma once

#include <stdexcept>
#include <string>

namespace chc {

// Base of every error raised by the library. Callers that only care about
// "the numerics failed" can catch this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryMismatch : public Error {
 public:
  using Error::Error;
};

// A value was requested outside the open domain of a potential (or inside
// the guard band of a singular one).
class DomainViolation : public Error {
 public:
  using Error::Error;
};

class NotZeroMean : public Error {
 public:
  using Error::Error;
};

// Iterative linear solver hit its iteration cap or broke down.
class SolverDiverged : public Error {
 public:
  using Error::Error;
};

class NewtonDiverged : public Error {
 public:
  NewtonDiverged(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

// Time grids, lengths or configuration values of two inputs disagree.
class ConfigMismatch : public Error {
 public:
  using Error::Error;
};

// Malformed or incomplete run configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace chc
