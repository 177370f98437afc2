#pragma once

#include <stdexcept>
#include <string>

namespace grainflow {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on a real-valued argument was violated (alpha out of
/// range, negative smoothing, empty sum requested at a divergent point...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Kernel evaluated on its singular lattice (0, 2πk).
class SingularPointError : public DomainError {
public:
    using DomainError::DomainError;
};

class CoincidentPointsError : public Error {
public:
    CoincidentPointsError(std::size_t i, std::size_t j)
        : Error("coincident points at indices " + std::to_string(i) + " and " + std::to_string(j)),
          first(i), second(j) {}

    std::size_t first;
    std::size_t second;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// fourier_w could not reach the requested tolerance with the given cutoffs.
class QuadratureBudgetError : public Error {
public:
    using Error::Error;
};

/// A proven inequality failed numerically. Either the input is outside the
/// theory's assumptions or there is a bug in the kernel.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

} // namespace grainflow
