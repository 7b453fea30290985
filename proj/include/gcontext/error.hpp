#pragma once

#include <stdexcept>
#include <string>

namespace gcontext {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command line or configuration. The CLI maps it to exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Unreadable, malformed or inconsistent input data. Exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage failed; `stage()` names the step that aborted.
class StageError : public DataError {
 public:
  StageError(std::string stage, const std::string& what)
      : DataError("[" + stage + "] " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace gcontext
