#include "smsim/error.hpp"

namespace smsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownParent:
      return "UnknownParent";
    case ErrorCode::kDuplicateId:
      return "DuplicateId";
    case ErrorCode::kUnknownBlock:
      return "UnknownBlock";
    case ErrorCode::kParentMismatch:
      return "ParentMismatch";
    case ErrorCode::kInvalidPowerConfiguration:
      return "InvalidPowerConfiguration";
    case ErrorCode::kInvalidRunConfig:
      return "InvalidRunConfig";
    case ErrorCode::kEmptyGrid:
      return "EmptyGrid";
    case ErrorCode::kNoSignChange:
      return "NoSignChange";
    case ErrorCode::kDomainError:
      return "DomainError";
    case ErrorCode::kMalformedCsv:
      return "MalformedCsv";
  }
  return "Unknown";
}

}  // namespace smsim
