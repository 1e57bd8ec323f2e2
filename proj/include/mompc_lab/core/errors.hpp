#pragma once

#include <stdexcept>
#include <string>

namespace mompc_lab {

// Base class for all library errors so callers can catch one type.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed arguments: wrong sizes, out-of-range parameters, empty inputs.
struct InvalidInput : Error {
    using Error::Error;
};

// Input matrices that violate a rank precondition (affinely dependent
// points, singular pay-off matrix, ...).
struct RankDeficiency : Error {
    using Error::Error;
};

// Numerically degenerate situations detected at runtime: equal nadir and
// utopia components, no positive-definite solution, empty terminal set.
struct NumericalError : Error {
    using Error::Error;
};

// A problem that is structurally infeasible (contradictory bounds detected
// at construction time).
struct InfeasibleProblem : Error {
    using Error::Error;
};

// File/serialization failures.
struct IoError : Error {
    using Error::Error;
};

}  // namespace mompc_lab
