#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace walkforge {

/// Failure codes raised across the library. Each maps onto one of three
/// categories that the CLI turns into an exit status.
enum class Errc {
  // configuration
  InvalidConfig,
  InvalidSpec,
  UnknownKey,
  KTooLarge,
  // data
  MissingColumn,
  DuplicateDate,
  EmptyFile,
  ParseError,
  GapTooLong,
  LeadingNaN,
  InvalidOhlc,
  SeriesTooShort,
  ZeroDenominator,
  EmptyRange,
  ColumnMismatch,
  DimensionMismatch,
  ShapeMismatch,
  LengthMismatch,
  TooShort,
  RangeTooShort,
  EmptyGroup,
  ZeroActual,
  NonFiniteInput,
  StaleCache,
  BadArtifact,
  // numeric
  NonFiniteActivation,
  DivergedLoss,
  NoConvergence,
};

enum class ErrorCategory { Config, Data, Numeric };

std::string_view errc_name(Errc code) noexcept;
ErrorCategory category_of(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  Errc code_;
};

}  // namespace walkforge
