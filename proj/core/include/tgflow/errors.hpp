#pragma once

#include <stdexcept>

namespace tgflow {

/// Array/dimension mismatch in a numeric kernel.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (unknown key, infeasible budget,
/// operation unsupported by the model variant).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite value where a finite one is required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Required input file or run artifact is absent or unreadable.
struct MissingInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tgflow
