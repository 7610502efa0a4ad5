#include "sheafscope/error.hpp"

namespace sheafscope {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::SubbasisOutOfRange: return "SubbasisOutOfRange";
    case ErrorCode::NotOpen: return "NotOpen";
    case ErrorCode::NotSubset: return "NotSubset";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::UndefinedOperand: return "UndefinedOperand";
    case ErrorCode::NotDisjointCover: return "NotDisjointCover";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace sheafscope
