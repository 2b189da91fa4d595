#pragma once

#include <stdexcept>
#include <string>

namespace pico {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operand shapes do not conform (affine, mse, blend, ...).
struct DimensionError : Error {
  using Error::Error;
};

// A precondition on argument values failed (empty input, negative count, ...).
struct ValidationError : Error {
  using Error::Error;
};

// API used out of order (backward without a recording tape, ...).
struct StateError : Error {
  using Error::Error;
};

// NaN or Inf where a finite value is required.
struct NumericalError : Error {
  using Error::Error;
};

// A forward function expected to be deterministic produced two different values.
struct DeterminismError : Error {
  using Error::Error;
};

// File system or file format failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace pico
