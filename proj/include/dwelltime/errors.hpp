#pragma once

#include <stdexcept>
#include <string>

namespace dwelltime {

// Base of every error raised by the library. Physics-level failures
// (non-convergence, nonphysical states) derive from PhysicsError so the CLI
// can map them to a distinct exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// The grid cannot resolve the local wavelength. Carries a suggested node count.
class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& what, long suggested_points)
      : Error(what), suggested_points_(suggested_points) {}
  long suggested_points() const noexcept { return suggested_points_; }

 private:
  long suggested_points_;
};

class PhysicsError : public Error {
 public:
  using Error::Error;
};

class MatchingError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class BranchError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class ConvergenceError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class NonphysicalStateError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class ConsistencyError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

}  // namespace dwelltime
