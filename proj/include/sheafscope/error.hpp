#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sheafscope {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  CapExceeded,
  SubbasisOutOfRange,
  NotOpen,
  NotSubset,
  DomainMismatch,
  DimMismatch,
  TooFewPoints,
  ShapeMismatch,
  SpaceMismatch,
  UndefinedOperand,
  NotDisjointCover,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sheafscope
