#pragma once

#include <stdexcept>
#include <string>

namespace effscreen {

// Bad user-supplied configuration (flags, method parameters, file schemas).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input data violates a structural precondition (dimensions, codes, completeness).
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input is structurally fine but numerically degenerate for the requested analysis.
class degenerate_input_error : public std::runtime_error {
 public:
  explicit degenerate_input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// The requested configuration is outside what closed forms / algorithms cover.
class unsupported_error : public std::runtime_error {
 public:
  explicit unsupported_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace effscreen
