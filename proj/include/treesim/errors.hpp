#pragma once

#include <stdexcept>
#include <string>

namespace treesim {

// Bad parameter values, malformed inputs.
struct domain_error : std::invalid_argument {
  explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

// Request is valid but outside what this implementation will compute
// (rejection guards, enumeration limits, exact-mode size caps).
struct capability_error : std::runtime_error {
  explicit capability_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace treesim
