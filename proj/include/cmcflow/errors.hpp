#pragma once

#include <stdexcept>
#include <string>

namespace cmcflow {

/// Reference data violates the small-curvature or grid invariants.
struct InvalidDataError : std::runtime_error {
    explicit InvalidDataError(const std::string& what) : std::runtime_error(what) {}
};

/// The evolving surface left graph form (Theta too small or metric degenerate).
struct GraphViolationError : std::runtime_error {
    explicit GraphViolationError(const std::string& what) : std::runtime_error(what) {}
};

/// A time step produced non-finite fields.
struct StepFailureError : std::runtime_error {
    explicit StepFailureError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver did not converge within its budget.
struct IterationFailureError : std::runtime_error {
    explicit IterationFailureError(const std::string& what) : std::runtime_error(what) {}
};

/// Not enough trajectory records to perform the requested fit.
struct InsufficientDataError : std::runtime_error {
    explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

/// A required run artifact (trajectory, snapshot, config) is missing.
struct MissingArtifactError : std::runtime_error {
    explicit MissingArtifactError(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be opened, read, or written.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// A documented precondition of an operation does not hold for the given input.
struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cmcflow
