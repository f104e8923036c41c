#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace floodprio {

enum class ErrorKind {
  Validation,
  NotFound,
  Internal,
};

// Single exception type for the engine. The kind decides the CLI exit code
// and the HTTP status the service answers with.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& message) {
  throw Error(ErrorKind::Validation, message);
}

[[noreturn]] inline void fail_not_found(const std::string& message) {
  throw Error(ErrorKind::NotFound, message);
}

// Re-throws the in-flight exception with "<stage>: " prefixed to its message.
// Must be called from inside a catch block.
[[noreturn]] void rethrow_with_stage(std::string_view stage);

int exit_code_for(ErrorKind kind) noexcept;

}  // namespace floodprio
