#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adavol {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ADAVOL_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  };

// garch_core
ADAVOL_DEFINE_ERROR(NonNegativityViolation)
ADAVOL_DEFINE_ERROR(StationarityViolation)
ADAVOL_DEFINE_ERROR(UnsupportedOrder)
ADAVOL_DEFINE_ERROR(InvalidArgument)

// filtering and losses
ADAVOL_DEFINE_ERROR(NonPositiveVariance)
ADAVOL_DEFINE_ERROR(ModeMismatch)
ADAVOL_DEFINE_ERROR(WindowTooSmall)

// estimators
ADAVOL_DEFINE_ERROR(InvalidConfig)
ADAVOL_DEFINE_ERROR(NonFiniteInput)

// metrics
ADAVOL_DEFINE_ERROR(LengthMismatch)
ADAVOL_DEFINE_ERROR(NonPositiveTruth)
ADAVOL_DEFINE_ERROR(AlphaOutOfRange)
ADAVOL_DEFINE_ERROR(DomainError)

// ingestion
ADAVOL_DEFINE_ERROR(EmptySeries)
ADAVOL_DEFINE_ERROR(NonMonotoneDates)

#undef ADAVOL_DEFINE_ERROR

/// Malformed input row. Rows are 1-based and count the header as row 1.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& reason)
      : Error("row " + std::to_string(row) + ": " + reason), row_(row) {}

  [[nodiscard]] std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace adavol
