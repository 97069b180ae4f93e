#pragma once

#include <stdexcept>
#include <string>

namespace liouville {

// Error taxonomy shared across the library. The CLI maps these to exit codes:
// config/parse -> 1, numeric/verification -> 2, chart ineligibility -> 3.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mismatched degree counts or field arity.
struct DimensionError : Error {
  using Error::Error;
};

// NaN/Inf encountered where a finite value is required.
struct NumericError : Error {
  using Error::Error;
};

// Step budget exhausted before reaching the integration target.
struct DivergenceError : NumericError {
  using NumericError::NumericError;
};

// Backward/forward trajectory left the finite domain; the completeness
// assumption fails numerically along this ray.
struct IncompletenessError : NumericError {
  using NumericError::NumericError;
};

// Level set is open or unbounded; no action-angle chart exists there.
struct NonCompactError : Error {
  using Error::Error;
};

// Level is on (or within the guard band of) a critical value.
struct SeparatrixError : Error {
  using Error::Error;
};

// Closed-orbit return not observed within the parameter cap.
struct PeriodNotFoundError : Error {
  using Error::Error;
};

// Chart evaluated outside its valid domain, or inversion failed.
struct ChartDomainError : Error {
  using Error::Error;
};

// Configuration file or expression rejected before any computation.
struct ConfigError : Error {
  using Error::Error;
};

struct ExprError : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace liouville
