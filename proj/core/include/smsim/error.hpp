#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smsim {

enum class ErrorCode {
  kUnknownParent,
  kDuplicateId,
  kUnknownBlock,
  kParentMismatch,
  kInvalidPowerConfiguration,
  kInvalidRunConfig,
  kEmptyGrid,
  kNoSignChange,
  kDomainError,
  kMalformedCsv,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace smsim
