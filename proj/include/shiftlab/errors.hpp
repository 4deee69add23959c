#pragma once

#include <stdexcept>
#include <string>

namespace shiftlab {

struct NonUnitInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An iterative procedure exhausted its budget without reaching a
/// certificate; signals a numerically hard input, never a silent fallback.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Membership query at a point whose lift coordinate is exactly zero.
struct DegenerateQuery : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Majority amplification saw zero accepting runs.
struct AllRunsRejected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigInvalid : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownScenario : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace shiftlab
