#pragma once

#include <stdexcept>

namespace precipgen {

// Malformed configuration: bad dimensions, step exponent outside its domain,
// operations invoked on datasets lacking required structure, etc.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input files: CSV parse failures, duplicate keys,
// model files whose shapes disagree with their declared dimensions.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical degeneracy during inference, e.g. every state impossible at some
// time step.
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace precipgen
