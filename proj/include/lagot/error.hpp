#pragma once

#include <stdexcept>
#include <string>

namespace lagot {

enum class ErrorCode {
  kOk = 0,
  kInvalidInput = 1,
  kConfig = 2,
  kConvergence = 3,
  kMissingDependency = 4,
  kDivergence = 5,
  kImbalance = 6,
  kSolver = 7,
  kIo = 8,
};

const char* to_string(ErrorCode code);

// Base of every exception thrown by the library. The C API maps `code()`
// onto its integer status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what)
      : Error(ErrorCode::kInvalidInput, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCode::kConfig, what) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what)
      : Error(ErrorCode::kDivergence, what) {}
};

class ImbalanceError : public Error {
 public:
  explicit ImbalanceError(const std::string& what)
      : Error(ErrorCode::kImbalance, what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what)
      : Error(ErrorCode::kSolver, what) {}
};

class MissingDependency : public Error {
 public:
  explicit MissingDependency(const std::string& what)
      : Error(ErrorCode::kMissingDependency, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

}  // namespace lagot
