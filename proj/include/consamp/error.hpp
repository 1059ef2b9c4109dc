#pragma once

#include <stdexcept>
#include <string>

namespace consamp {

/// Vector or matrix sizes disagree with the problem dimension.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation was violated by the caller.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Runtime failure inside a sampler: divergent trajectory, too many
/// reflections, non-convergent Newton solve.
struct SamplerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergenceError : SamplerError {
  using SamplerError::SamplerError;
};

struct StepFailure : SamplerError {
  using SamplerError::SamplerError;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace consamp
