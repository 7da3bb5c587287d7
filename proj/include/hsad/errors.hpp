#pragma once

#include <stdexcept>
#include <string>

namespace hsad {

// Error taxonomy, mirrored by the CLI exit codes:
//   ParamError   -> exit 2 (usage / invalid parameters)
//   DataError    -> exit 3 (bad input data, shapes, file formats)
//   NumericError -> exit 4 (numerical failures)
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParamError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

// ENVI/file container violations.
struct FormatError : DataError {
    using DataError::DataError;
};

// Payload size does not match the declared geometry.
struct SizeError : DataError {
    using DataError::DataError;
};

// Dimension mismatch between objects that must agree.
struct ShapeError : DataError {
    using DataError::DataError;
};

// Metric preconditions (e.g. single-class truth).
struct EvalError : DataError {
    using DataError::DataError;
};

// Synthetic scene construction could not satisfy the request.
struct GenError : ParamError {
    using ParamError::ParamError;
};

struct NumericError : Error {
    using Error::Error;
};

// Covariance not positive definite at the requested ridge.
struct SingularityError : NumericError {
    using NumericError::NumericError;
};

} // namespace hsad
