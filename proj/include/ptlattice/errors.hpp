#pragma once

#include <stdexcept>
#include <string>

namespace ptlattice {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or type invariant.
/// The CLI maps this family to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

class BadSize : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DimensionMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class RangeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OutOfRegime : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Numerical failure. The CLI maps this family to exit code 2.
class NumericError : public Error {
public:
    using Error::Error;
};

class NoConvergence : public NumericError {
public:
    using NumericError::NumericError;
};

class BranchCut : public NumericError {
public:
    using NumericError::NumericError;
};

class Overflow : public NumericError {
public:
    using NumericError::NumericError;
};

class InsufficientData : public NumericError {
public:
    using NumericError::NumericError;
};

class DegenerateMode : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace ptlattice
