#ifndef GENBOUND_ERROR_HPP
#define GENBOUND_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace genbound {

enum class ErrorCode {
  InvalidInput,
  DimensionMismatch,
  NotIrreducible,
  DivergentDensity,
  Unresolved,
  ExactTooLarge,
  GapDegenerate,
  ZetaConstraint,
  UnitRootOffset,
  ZeroMixtureWeight,
  InvalidCdf,
  InvalidGrid,
  InvalidLoss,
  CoefficientCheckFailed,
  ParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::DivergentDensity: return "DivergentDensity";
    case ErrorCode::Unresolved: return "Unresolved";
    case ErrorCode::ExactTooLarge: return "ExactTooLarge";
    case ErrorCode::GapDegenerate: return "GapDegenerate";
    case ErrorCode::ZetaConstraint: return "ZetaConstraint";
    case ErrorCode::UnitRootOffset: return "UnitRootOffset";
    case ErrorCode::ZeroMixtureWeight: return "ZeroMixtureWeight";
    case ErrorCode::InvalidCdf: return "InvalidCdf";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InvalidLoss: return "InvalidLoss";
    case ErrorCode::CoefficientCheckFailed: return "CoefficientCheckFailed";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Domain error carrying a machine-readable code and the offending input field.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string field = {})
      : std::runtime_error(std::move(message)), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

inline void require(bool condition, ErrorCode code, const std::string& message,
                    const std::string& field = {}) {
  if (!condition) throw Error(code, message, field);
}

}  // namespace genbound

#endif  // GENBOUND_ERROR_HPP
