#pragma once

#include <stdexcept>
#include <string>

namespace sublinear {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad shapes, asymmetric cells, non-finite values, dimension mismatch.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A size argument is out of range (padding below the current order, permutation length mismatch).
class SizeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Exact matching was requested for graphs above the enumeration cap.
class CapacityError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A geometric quantity was requested from a model whose weight graph has zero norm.
class DegenerateModelError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// The synthetic generator could not satisfy the requested margin within its sampling budget.
class InfeasibleSpecError : public Error {
public:
    using Error::Error;
};

}  // namespace sublinear
