#pragma once

#include <stdexcept>
#include <string>

namespace inertia {

// A precondition on user-supplied input was violated. The message names it.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed: blow-up, non-convergence, non-contraction.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define INERTIA_REQUIRE(cond, msg)                     \
  do {                                                 \
    if (!(cond)) throw ::inertia::ValidationError(msg); \
  } while (false)

}  // namespace inertia
