#pragma once

#include <stdexcept>
#include <string>

namespace qmini {

/// Base class for every error raised by the framework.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when a request would exceed a configured memory guard.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

class InvalidCut : public Error {
 public:
  using Error::Error;
};

class UnsupportedObservable : public Error {
 public:
  using Error::Error;
};

class UnsupportedAnsatz : public Error {
 public:
  using Error::Error;
};

/// Mini-app configuration did not pass schema validation.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A pipeline stage expected a context key that no upstream stage produced.
class PipelineWiringError : public Error {
 public:
  using Error::Error;
};

/// Failure while executing work (a worker rank died, a task threw, ...).
class ExecutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmini
