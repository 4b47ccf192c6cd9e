#pragma once

#include <stdexcept>
#include <string>

namespace gaugenet {

// Bad user input: malformed files, contract violations on arguments.
// The CLI maps this to exit code 2.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical or runtime failure during an otherwise valid computation.
// The CLI maps this to exit code 1.
struct compute_error : std::runtime_error {
  explicit compute_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gaugenet
