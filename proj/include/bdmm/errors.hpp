#pragma once

#include <stdexcept>
#include <string>

namespace bdmm {

/// Malformed model/study configuration document.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structurally invalid data (trajectory files, CSV ingestion, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric failure: non-convergence, singular matrices, degenerate sampling.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bdmm
