#pragma once

#include <stdexcept>
#include <string>

namespace nsac {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SnapshotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an integration produces non-finite coefficients; carries the
// first offending time.
struct IntegrationError : std::runtime_error {
  IntegrationError(const std::string& msg, double when)
      : std::runtime_error(msg + " at t = " + std::to_string(when)), t(when) {}
  double t;
};

}  // namespace nsac
