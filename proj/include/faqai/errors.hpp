#pragma once

#include <stdexcept>
#include <string>

namespace faqai {

// Malformed inputs: tag mismatches, schema violations, bad arguments.
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An enumeration or oracle budget was exceeded.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No plan could be built, or a plan invariant was broken.
struct PlanningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad data files, label domains, unsupported query shapes.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An optimizer produced a non-finite objective.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace faqai
