#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mqlat {

enum class ErrorCode {
  NotSquarefree,
  DegenerateField,
  UnsupportedCase,
  Overflow,
  NotOddPrime,
  NotPrime,
  NotCompletelySplit,
  SingularSystem,
  InfeasibleProfile,
  DimensionTooLarge,
  LengthMismatch,
  InconsistentDecisions,
  RankDeficientChannel,
  SingularBasis,
  EpsOutOfRange,
  InvalidArgument,
  ParseError,
  Internal,
};

std::string_view to_string(ErrorCode code);

// All domain failures raised by the library carry one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mqlat
