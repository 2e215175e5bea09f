#pragma once

#include <stdexcept>
#include <string>

namespace shortrace {

// Bad input: malformed files, parameters outside their domain, violated
// configuration invariants. The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A zero table does not reach the height a computation needs.
class CoverageError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// A requested computation would exceed a hard resource budget
// (sieve ceiling, enumeration size, quadrature node count).
class BudgetError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

}  // namespace shortrace
