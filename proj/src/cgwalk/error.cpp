#include "cgwalk/error.hpp"

namespace cgwalk {

const char* error_code_name(ErrorCode code) {
  switch (code) {
  case ErrorCode::kBadArgument:
    return "bad_argument";
  case ErrorCode::kLengthMismatch:
    return "length_mismatch";
  case ErrorCode::kIndexOutOfRange:
    return "index_out_of_range";
  case ErrorCode::kDuplicateInstanceId:
    return "duplicate_instance_id";
  case ErrorCode::kNonFinite:
    return "non_finite";
  case ErrorCode::kIo:
    return "io";
  case ErrorCode::kParse:
    return "parse";
  case ErrorCode::kConfig:
    return "config";
  case ErrorCode::kInternal:
    return "internal";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cgwalk
