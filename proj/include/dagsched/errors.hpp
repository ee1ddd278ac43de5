#pragma once

#include <stdexcept>
#include <string>

namespace dagsched {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Graph contains a directed cycle.
struct CyclicGraphError : Error {
    using Error::Error;
};

// Containers passed to an operation do not match the instance dimensions.
struct ShapeMismatchError : Error {
    using Error::Error;
};

// Resource sequences plus precedence arcs form a cycle; no start times exist.
struct InconsistentOrderError : Error {
    using Error::Error;
};

// Generator or solver parameters outside their documented domain.
struct InvalidParamsError : Error {
    using Error::Error;
};

// Malformed input file (syntax, missing field, wrong type).
struct ParseError : Error {
    using Error::Error;
};

// Input parsed but violates a model invariant; message lists the violations.
struct ValidationFailedError : Error {
    using Error::Error;
};

// Requested horizon cannot fit any feasible schedule.
struct HorizonTooSmallError : Error {
    using Error::Error;
};

// Instance exceeds the exhaustive-search size caps.
struct TooLargeError : Error {
    using Error::Error;
};

// An activity has zero or several starts in a model assignment.
struct MultipleStartsError : Error {
    using Error::Error;
};

// Warm-start schedule handed to the solver fails the feasibility check.
struct InfeasibleWarmStartError : Error {
    using Error::Error;
};

// Output stream failed while writing an export.
struct SinkFailureError : Error {
    using Error::Error;
};

// Schedule handed to a makespan-normalizing operation is infeasible.
struct InfeasibleScheduleError : Error {
    using Error::Error;
};

}  // namespace dagsched
