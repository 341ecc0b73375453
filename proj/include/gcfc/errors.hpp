#pragma once

#include <stdexcept>
#include <string>

namespace gcfc {

// Error taxonomy. ValidationError covers bad user input (configs, corpora,
// CLI overrides) and maps to exit code 1; everything else is an internal or
// numeric failure and maps to exit code 2.
struct GcfcError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : GcfcError {
  using GcfcError::GcfcError;
};

struct NumericError : GcfcError {
  using GcfcError::GcfcError;
};

struct ValidationError : GcfcError {
  using GcfcError::GcfcError;
};

struct IoError : GcfcError {
  using GcfcError::GcfcError;
};

struct ContractError : GcfcError {
  using GcfcError::GcfcError;
};

// Thrown when a test oracle's own precondition fails (e.g. the function under
// finite differencing is not deterministic).
struct OracleError : GcfcError {
  using GcfcError::GcfcError;
};

}  // namespace gcfc
