#pragma once

#include <stdexcept>
#include <string>

namespace cgwalk {

enum class ErrorCode {
  kBadArgument,
  kLengthMismatch,
  kIndexOutOfRange,
  kDuplicateInstanceId,
  kNonFinite,
  kIo,
  kParse,
  kConfig,
  kInternal,
};

const char* error_code_name(ErrorCode code);

// All recoverable failures in the library are reported as Error; the C API
// translates them into status codes at the boundary.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace cgwalk
