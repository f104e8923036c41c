#include "floodprio/error.hpp"

#include <exception>

namespace floodprio {

void rethrow_with_stage(std::string_view stage) {
  const std::string prefix = std::string(stage) + ": ";
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.kind(), prefix + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Internal, prefix + e.what());
  }
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Validation:
      return 2;
    case ErrorKind::NotFound:
      return 3;
    case ErrorKind::Internal:
      return 4;
  }
  return 4;
}

}  // namespace floodprio
