#pragma once

#include <stdexcept>
#include <string>

namespace pedalign {

// Error taxonomy shared by the whole library. The CLI maps these onto
// process exit codes, so new error types should extend one of the
// categories below rather than throwing std::runtime_error directly.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A value outside its documented domain (negative ratio, zero stride, ...).
struct InvalidParameterError : Error {
    using Error::Error;
};

// Mismatched shapes: channel counts, rectangle element counts, grid sizes.
struct DimensionError : Error {
    using Error::Error;
};

// A box that covers no pixels after clipping to the image.
struct EmptyRegionError : Error {
    using Error::Error;
};

// Malformed input file. Message carries file and line where possible.
struct ParseError : Error {
    using Error::Error;
};

// Structurally valid input that violates a dataset invariant.
struct ValidationError : Error {
    using Error::Error;
};

// Synthetic scene generation could not satisfy its placement constraints.
struct GenerationError : Error {
    using Error::Error;
};

// A metric that is undefined for the given inputs (e.g. no evaluable GT).
struct UndefinedMetricError : Error {
    using Error::Error;
};

// A required file, map, or manifest entry is absent.
struct MissingInputError : Error {
    using Error::Error;
};

}  // namespace pedalign
