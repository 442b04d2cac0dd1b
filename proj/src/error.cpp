#include "walkforge/error.hpp"

namespace walkforge {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::DuplicateDate: return "DuplicateDate";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::ParseError: return "ParseError";
    case Errc::GapTooLong: return "GapTooLong";
    case Errc::LeadingNaN: return "LeadingNaN";
    case Errc::InvalidOhlc: return "InvalidOhlc";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::ZeroDenominator: return "ZeroDenominator";
    case Errc::EmptyRange: return "EmptyRange";
    case Errc::ColumnMismatch: return "ColumnMismatch";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::TooShort: return "TooShort";
    case Errc::RangeTooShort: return "RangeTooShort";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::ZeroActual: return "ZeroActual";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::StaleCache: return "StaleCache";
    case Errc::BadArtifact: return "BadArtifact";
    case Errc::NonFiniteActivation: return "NonFiniteActivation";
    case Errc::DivergedLoss: return "DivergedLoss";
    case Errc::NoConvergence: return "NoConvergence";
  }
  return "Unknown";
}

ErrorCategory category_of(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidConfig:
    case Errc::InvalidSpec:
    case Errc::UnknownKey:
    case Errc::KTooLarge:
      return ErrorCategory::Config;
    case Errc::NonFiniteActivation:
    case Errc::DivergedLoss:
    case Errc::NoConvergence:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

}  // namespace walkforge
