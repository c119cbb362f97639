#pragma once

#include <stdexcept>
#include <string>

namespace cubepose {

enum class ErrorCode {
  kInvalidArgument = 1,
  kDegenerate = 2,
  kSingular = 3,
  kConstraintViolation = 4,
  kParse = 5,
  kIo = 6,
  kUnmatched = 7,
};

// Every failure in the library is reported as an Error carrying a code the C
// API can translate 1:1 into a status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cubepose
