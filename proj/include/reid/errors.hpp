#pragma once

#include <stdexcept>

namespace reid {

// Rejected input: bad shapes, stochastic constraints violated, malformed
// configs. The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem or parse failure while reading or writing artifacts. The CLI
// maps this to exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace reid
