#pragma once

#include <stdexcept>
#include <string>

namespace symgraph {

// Precondition violations: bad dimensions, out-of-range values, malformed specs.
struct invalid_input : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An enumeration or table would exceed a configured cap. The message names the cap.
struct capacity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A constraint admits no profile at all.
struct empty_set_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation applied to an object in the wrong state (e.g. a non-converged solution).
struct invalid_state : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace symgraph
