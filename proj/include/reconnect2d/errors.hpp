#pragma once

#include <stdexcept>
#include <string>

namespace reconnect2d {

// Invalid user input or scenario parameters. Maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a step would violate the CFL bound; the caller retries with dt/2.
struct StepSizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN or overflow during time stepping. Maps to exit code 3.
struct NumericAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A theorem hypothesis or operation precondition does not hold. Exit code 4.
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace reconnect2d
