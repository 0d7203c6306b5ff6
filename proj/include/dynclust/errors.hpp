#pragma once

#include <stdexcept>
#include <string>

namespace dynclust {

enum class ErrorCode {
  kDuplicateInsert,
  kDeleteOfInactive,
  kUnknownPoint,
  kInfeasible,
  kUnsupportedMetric,
  kRadiusOutOfRange,
  kBudgetExceeded,
  kNotCleanOperation,
  kCapacityExceeded,
  kGuessTooSmall,
  kMalformedInput,
  kInvalidArgument,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dynclust
