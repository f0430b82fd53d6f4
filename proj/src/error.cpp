#include "mqlat/error.hpp"

namespace mqlat {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquarefree: return "NotSquarefree";
    case ErrorCode::DegenerateField: return "DegenerateField";
    case ErrorCode::UnsupportedCase: return "UnsupportedCase";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NotOddPrime: return "NotOddPrime";
    case ErrorCode::NotPrime: return "NotPrime";
    case ErrorCode::NotCompletelySplit: return "NotCompletelySplit";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InfeasibleProfile: return "InfeasibleProfile";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InconsistentDecisions: return "InconsistentDecisions";
    case ErrorCode::RankDeficientChannel: return "RankDeficientChannel";
    case ErrorCode::SingularBasis: return "SingularBasis";
    case ErrorCode::EpsOutOfRange: return "EpsOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace mqlat
